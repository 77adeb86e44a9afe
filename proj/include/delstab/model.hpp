#pragma once

#include <string>
#include <utility>
#include <vector>

namespace delstab {

/// Relative tolerance below which trace/determinant/discriminant values are
/// treated as non-generic rather than resolved by sign.
inline constexpr double kMarginalTol = 1e-9;

/// Real coupling coefficients of the linear system. Planar systems use the
/// 2x2 block a11..a22; triadic systems add a23, a32, a33 (a13 and a31 are
/// structurally zero in the supported triad topologies).
struct InteractionMatrix {
    int dim = 2; // 2 or 3
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
    double a23 = 0, a32 = 0, a33 = 0;

    static InteractionMatrix planar(double a11, double a12, double a21, double a22);
    static InteractionMatrix triad(double a11, double a12, double a21, double a22,
                                   double a23, double a32, double a33);
    /// 4 or 7 coefficients ordered [a11,a12,a21,a22] / [a11,a12,a21,a22,a23,a32,a33].
    static InteractionMatrix from_coeffs(const std::vector<double>& coeffs);

    double trace() const { return a11 + a22; } // planar block
    double det() const { return a11 * a22 - a12 * a21; }
    /// max-norm over stored entries, used to scale tolerances
    double max_abs() const;
    std::vector<double> coeffs() const;
};

/// Linear relationship model with ideal states; relaxes each state toward its
/// ideal and toward the partner's state.
struct GoalModel {
    double c = 0, d = 0, e = 0, f = 0;
    double rstar = 0, jstar = 0;
};

enum class Placement {
    None,           // no delayed terms
    Own,            // a11 delayed
    Cross,          // a12 delayed
    RowR,           // a11, a12 delayed
    ColR,           // a11, a21 delayed
    Diagonal,       // a11, a22 delayed
    AntiDiagonal,   // a12, a21 delayed
    ThreeOwnLast,   // a11, a12, a21 delayed (a22 instantaneous)
    ThreeCrossLast, // a11, a12, a22 delayed (a21 instantaneous)
    Full,           // all four delayed
    MixedSelf,      // a11 delayed plus an extra instantaneous self term a13
    PureCross,      // a12 delayed with a11 = a22 = 0 (oscillator form)
    TriadJIn,       // triad: a21, a23 delayed
    TriadJOwn,      // triad: a22 delayed
};

/// Which reaction terms carry the common delay. MixedSelf keeps the extra
/// instantaneous self-coefficient here because it is part of the placement,
/// not of the coupling matrix.
struct DelayPlacement {
    Placement kind = Placement::None;
    double a13 = 0.0; // only meaningful for MixedSelf

    /// 1-based (row, col) indices of the delayed coefficients.
    std::vector<std::pair<int, int>> delayed_pairs() const;
    bool is_triad() const {
        return kind == Placement::TriadJIn || kind == Placement::TriadJOwn;
    }
};

std::string to_string(Placement p);
Placement placement_from_string(const std::string& name);

/// A coupling matrix together with a delay placement, validated for
/// dimensional consistency.
struct DelaySystem {
    InteractionMatrix matrix;
    DelayPlacement placement;
};

enum class BaselineVerdict { Stable, Unstable, MarginalCenter, MarginalZeroRoot };

struct BaselineStability {
    double trace = 0;
    double determinant = 0;
    BaselineVerdict verdict = BaselineVerdict::Stable;
    bool is_marginal() const {
        return verdict == BaselineVerdict::MarginalCenter ||
               verdict == BaselineVerdict::MarginalZeroRoot;
    }
};

std::string to_string(BaselineVerdict v);

/// Sign classification of the planar zero-delay system by trace and
/// determinant. |trace| or |det| below kMarginalTol (relative to the matrix
/// max-norm) is reported as marginal instead of being rounded to a sign.
BaselineStability classify_baseline(const InteractionMatrix& m);

/// Stationary state of the goal model plus the coupling matrix of the
/// deviation variables. Throws NonGenericError when the stationarity system
/// is singular (no unique equilibrium).
std::pair<std::pair<double, double>, InteractionMatrix> homogenize(const GoalModel& g);

/// Validated system value; throws ConfigError on dimension mismatch or
/// non-finite entries. PureCross additionally requires a11 = a22 = 0.
DelaySystem build_system(const InteractionMatrix& m, const DelayPlacement& p);

/// Matrix that governs the system at tau = 0. Identical to the coupling
/// matrix except for MixedSelf, where the instantaneous a13 folds into a11.
InteractionMatrix effective_tau0_matrix(const DelaySystem& sys);

} // namespace delstab
