#pragma once

#include <array>
#include <string>
#include <vector>

#include "delstab/model.hpp"

namespace delstab {

/// Growth rate reported when the trajectory has decayed below 1e-300.
inline constexpr double kDecayedRate = -1e9;

/// Initial data on [-tau, 0]: either constant per component or a sampled
/// table interpolated with a Catmull-Rom cubic.
class HistoryFunction {
  public:
    static HistoryFunction constant(std::vector<double> values);
    static HistoryFunction sampled(std::vector<double> times,
                                   std::vector<std::vector<double>> states);

    /// Component values at time t (expected in [-tau, 0]).
    std::array<double, 3> eval(double t) const;
    int dim() const { return dim_; }
    bool covers(double tau) const; // domain includes [-tau, 0]

  private:
    bool constant_ = true;
    int dim_ = 2;
    std::array<double, 3> values_{};
    std::vector<double> times_;
    std::vector<std::array<double, 3>> states_;
};

/// Fixed-step trajectory with cubic Hermite dense output. Stored derivatives
/// make delayed lookups fourth-order accurate between grid points.
struct Trajectory {
    int dim = 2;
    double step = 0;
    std::vector<double> times; // strictly increasing, spacing == step
    std::vector<std::array<double, 3>> states;
    std::vector<std::array<double, 3>> derivs;
    bool diverged = false; // hit the overflow guard before the horizon

    std::array<double, 3> eval(double t) const;
    double norm_at(size_t i) const;
    bool empty() const { return times.empty(); }
};

/// Classical fourth-order method of steps: h is lowered to the nearest exact
/// divisor of tau, delayed terms are read from the dense history of completed
/// steps, and tau = 0 degenerates to a plain ODE solve. Trajectories that
/// exceed the 1e12 overflow guard are truncated and flagged.
Trajectory integrate(const DelaySystem& sys, double tau, const HistoryFunction& history,
                     double horizon, double h);

struct GrowthEstimate {
    double rate = 0;
    int peak_count = 0;
    bool low_confidence = false; // fewer than 8 envelope peaks
    bool decayed = false;        // norm fell below 1e-300
};

/// Slope of a least-squares line through the log peak-envelope of the state
/// norm over the trailing half of the trajectory; falls back to a direct
/// log-norm fit when the signal is not oscillatory.
GrowthEstimate estimate_growth(const Trajectory& traj);
double growth_rate(const Trajectory& traj);

/// Mean spacing of successive maxima of the given component over the
/// trailing half (the oscillation period).
double dominant_period(const Trajectory& traj, int component = 0);

/// CSV with header "t,r,j" or "t,r,j,p", 17 significant digits.
void export_trajectory(const Trajectory& traj, const std::string& path);

} // namespace delstab
