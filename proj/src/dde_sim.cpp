#include "delstab/dde_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "delstab/errors.hpp"

namespace delstab {

namespace {

constexpr double kOverflowGuard = 1e12;

using State = std::array<double, 3>;

struct SplitMatrices {
    int dim = 2;
    double inst[3][3] = {};
    double del[3][3] = {};
};

SplitMatrices split_system(const DelaySystem& sys) {
    SplitMatrices s;
    s.dim = sys.matrix.dim;
    const auto& m = sys.matrix;
    double full[3][3] = {{m.a11, m.a12, 0.0}, {m.a21, m.a22, m.a23}, {0.0, m.a32, m.a33}};
    for (int r = 0; r < s.dim; ++r)
        for (int c = 0; c < s.dim; ++c) s.inst[r][c] = full[r][c];
    for (const auto& [r, c] : sys.placement.delayed_pairs()) {
        s.del[r - 1][c - 1] = s.inst[r - 1][c - 1];
        s.inst[r - 1][c - 1] = 0.0;
    }
    if (sys.placement.kind == Placement::MixedSelf) s.inst[0][0] += sys.placement.a13;
    return s;
}

State apply(const double a[3][3], const State& x, int dim) {
    State y{};
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) y[r] += a[r][c] * x[c];
    return y;
}

State axpy(const State& x, double alpha, const State& y, int dim) {
    State r{};
    for (int i = 0; i < dim; ++i) r[i] = x[i] + alpha * y[i];
    return r;
}

double norm(const State& x, int dim) {
    double s = 0;
    for (int i = 0; i < dim; ++i) s += x[i] * x[i];
    return std::sqrt(s);
}

} // namespace

HistoryFunction HistoryFunction::constant(std::vector<double> values) {
    if (values.size() != 2 && values.size() != 3)
        throw ConfigError("history needs 2 or 3 components");
    HistoryFunction h;
    h.constant_ = true;
    h.dim_ = static_cast<int>(values.size());
    for (size_t i = 0; i < values.size(); ++i) h.values_[i] = values[i];
    return h;
}

HistoryFunction HistoryFunction::sampled(std::vector<double> times,
                                         std::vector<std::vector<double>> states) {
    if (times.size() < 2 || times.size() != states.size())
        throw ConfigError("sampled history needs matching times/states with >= 2 rows");
    for (size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw ConfigError("history times must be increasing");
    HistoryFunction h;
    h.constant_ = false;
    h.dim_ = static_cast<int>(states.front().size());
    if (h.dim_ != 2 && h.dim_ != 3) throw ConfigError("history needs 2 or 3 components");
    h.times_ = std::move(times);
    for (const auto& row : states) {
        if (static_cast<int>(row.size()) != h.dim_)
            throw ConfigError("inconsistent history row width");
        State s{};
        for (int i = 0; i < h.dim_; ++i) s[static_cast<size_t>(i)] = row[static_cast<size_t>(i)];
        h.states_.push_back(s);
    }
    return h;
}

bool HistoryFunction::covers(double tau) const {
    if (constant_) return true;
    return times_.front() <= -tau + 1e-12 && times_.back() >= -1e-12;
}

std::array<double, 3> HistoryFunction::eval(double t) const {
    if (constant_) return values_;
    // Catmull-Rom cubic with clamped end slopes
    const auto& ts = times_;
    size_t j = std::upper_bound(ts.begin(), ts.end(), t) - ts.begin();
    if (j == 0) j = 1;
    if (j >= ts.size()) j = ts.size() - 1;
    const size_t i = j - 1;
    const double h = ts[j] - ts[i];
    const double u = std::clamp((t - ts[i]) / h, 0.0, 1.0);
    State m0{}, m1{};
    for (int c = 0; c < dim_; ++c) {
        const double yi = states_[i][c], yj = states_[j][c];
        m0[c] = i > 0 ? (yj - states_[i - 1][c]) / (ts[j] - ts[i - 1]) : (yj - yi) / h;
        m1[c] = j + 1 < ts.size() ? (states_[j + 1][c] - yi) / (ts[j + 1] - ts[i]) : (yj - yi) / h;
    }
    State out{};
    const double u2 = u * u, u3 = u2 * u;
    for (int c = 0; c < dim_; ++c) {
        out[c] = (2 * u3 - 3 * u2 + 1) * states_[i][c] + (u3 - 2 * u2 + u) * h * m0[c] +
                 (-2 * u3 + 3 * u2) * states_[j][c] + (u3 - u2) * h * m1[c];
    }
    return out;
}

std::array<double, 3> Trajectory::eval(double t) const {
    if (times.empty()) throw ConfigError("empty trajectory");
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    const double h = step;
    size_t i = static_cast<size_t>((t - times.front()) / h);
    if (i + 1 >= times.size()) i = times.size() - 2;
    // guard flooring error at segment boundaries
    if (t < times[i]) --i;
    if (t > times[i + 1]) ++i;
    const double u = (t - times[i]) / h;
    const double u2 = u * u, u3 = u2 * u;
    State out{};
    for (int c = 0; c < dim; ++c) {
        out[c] = (2 * u3 - 3 * u2 + 1) * states[i][c] + (u3 - 2 * u2 + u) * h * derivs[i][c] +
                 (-2 * u3 + 3 * u2) * states[i + 1][c] + (u3 - u2) * h * derivs[i + 1][c];
    }
    return out;
}

double Trajectory::norm_at(size_t i) const {
    double s = 0;
    for (int c = 0; c < dim; ++c) s += states[i][c] * states[i][c];
    return std::sqrt(s);
}

Trajectory integrate(const DelaySystem& sys, double tau, const HistoryFunction& history,
                     double horizon, double h) {
    if (tau < 0) throw ConfigError("tau must be nonnegative");
    if (horizon < 0) throw ConfigError("horizon must be nonnegative");
    if (!(h > 0)) throw ConfigError("step must be positive");
    const SplitMatrices mats = split_system(sys);
    if (history.dim() != mats.dim) throw ConfigError("history dimension does not match the system");
    if (tau > 0 && !history.covers(tau))
        throw ConfigError("history does not cover [-tau, 0]");

    if (tau > 0) {
        const double m = std::ceil(tau / h - 1e-12);
        h = tau / m; // largest step <= h that divides tau exactly
    }

    Trajectory traj;
    traj.dim = mats.dim;
    traj.step = h;

    const auto delayed_value = [&](double t_query) -> State {
        if (tau == 0.0) return {};
        const double s = t_query - tau;
        if (s <= 0.0) return history.eval(s);
        return traj.eval(s);
    };
    const auto rhs = [&](double t, const State& x) -> State {
        State f = apply(mats.inst, x, mats.dim);
        if (tau == 0.0) {
            const State g = apply(mats.del, x, mats.dim);
            for (int i = 0; i < mats.dim; ++i) f[i] += g[i];
            return f;
        }
        const State xd = delayed_value(t);
        const State g = apply(mats.del, xd, mats.dim);
        for (int i = 0; i < mats.dim; ++i) f[i] += g[i];
        return f;
    };

    State x = history.eval(0.0);
    const size_t n_steps = static_cast<size_t>(std::ceil(horizon / h - 1e-9));
    traj.times.reserve(n_steps + 1);
    traj.states.reserve(n_steps + 1);
    traj.derivs.reserve(n_steps + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    traj.derivs.push_back(rhs(0.0, x));

    for (size_t i = 0; i < n_steps; ++i) {
        const double t = static_cast<double>(i) * h;
        const State k1 = traj.derivs.back();
        const State k2 = rhs(t + 0.5 * h, axpy(x, 0.5 * h, k1, mats.dim));
        const State k3 = rhs(t + 0.5 * h, axpy(x, 0.5 * h, k2, mats.dim));
        const State k4 = rhs(t + h, axpy(x, h, k3, mats.dim));
        for (int c = 0; c < mats.dim; ++c)
            x[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        if (norm(x, mats.dim) > kOverflowGuard) {
            traj.diverged = true;
            break;
        }
        const double t_next = static_cast<double>(i + 1) * h;
        traj.times.push_back(t_next);
        traj.states.push_back(x);
        traj.derivs.push_back(rhs(t_next, x));
    }
    return traj;
}

GrowthEstimate estimate_growth(const Trajectory& traj) {
    GrowthEstimate est;
    if (traj.times.size() < 4) {
        est.low_confidence = true;
        return est;
    }
    const size_t n = traj.times.size();
    const size_t start = n / 2;

    std::vector<double> pt, pv; // peak times / log peak values
    double max_norm = 0.0;
    for (size_t i = std::max<size_t>(start, 1); i + 1 < n; ++i) {
        const double nm = traj.norm_at(i);
        max_norm = std::max(max_norm, nm);
        if (nm > traj.norm_at(i - 1) && nm >= traj.norm_at(i + 1) && nm > 1e-300) {
            pt.push_back(traj.times[i]);
            pv.push_back(std::log(nm));
        }
    }
    max_norm = std::max(max_norm, std::max(traj.norm_at(start), traj.norm_at(n - 1)));
    if (max_norm < 1e-300) {
        est.decayed = true;
        est.rate = kDecayedRate;
        est.low_confidence = true;
        return est;
    }
    est.peak_count = static_cast<int>(pt.size());

    if (pt.size() < 8) {
        // not oscillatory enough: fit the raw log-norm instead
        est.low_confidence = true;
        pt.clear();
        pv.clear();
        for (size_t i = start; i < n; ++i) {
            const double nm = traj.norm_at(i);
            if (nm > 1e-300) {
                pt.push_back(traj.times[i]);
                pv.push_back(std::log(nm));
            }
        }
        if (pt.size() < 2) {
            est.decayed = true;
            est.rate = kDecayedRate;
            return est;
        }
    }
    // least-squares slope
    double st = 0, sv = 0, stt = 0, stv = 0;
    const double nn = static_cast<double>(pt.size());
    for (size_t i = 0; i < pt.size(); ++i) {
        st += pt[i];
        sv += pv[i];
        stt += pt[i] * pt[i];
        stv += pt[i] * pv[i];
    }
    const double denom = nn * stt - st * st;
    est.rate = denom != 0.0 ? (nn * stv - st * sv) / denom : 0.0;
    return est;
}

double growth_rate(const Trajectory& traj) { return estimate_growth(traj).rate; }

double dominant_period(const Trajectory& traj, int component) {
    const size_t n = traj.times.size();
    std::vector<double> peaks;
    for (size_t i = std::max<size_t>(n / 2, 1); i + 1 < n; ++i) {
        const double v = traj.states[i][component];
        if (v > traj.states[i - 1][component] && v >= traj.states[i + 1][component])
            peaks.push_back(traj.times[i]);
    }
    if (peaks.size() < 2) return 0.0;
    return (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
}

void export_trajectory(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << (traj.dim == 3 ? "t,r,j,p\n" : "t,r,j\n");
    char buf[128];
    for (size_t i = 0; i < traj.times.size(); ++i) {
        if (traj.dim == 3)
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", traj.times[i],
                          traj.states[i][0], traj.states[i][1], traj.states[i][2]);
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", traj.times[i],
                          traj.states[i][0], traj.states[i][1]);
        out << buf;
    }
    if (!out.good()) throw ConfigError("write failed for '" + path + "'");
}

} // namespace delstab
