#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "delstab/charpoly.hpp"
#include "delstab/model.hpp"

namespace delstab {

/// Monic quadratic F(y) = y^2 + c1 y + c0 whose positive zeros y = omega^2
/// are the candidate crossing frequencies: F(y) = |P(i sqrt y)|^2 - |Q(i sqrt y)|^2.
struct AuxiliaryQuadratic {
    double c1 = 0;
    double c0 = 0;
    double delta() const { return c1 * c1 - 4.0 * c0; }
    double eval(double y) const { return (y + c1) * y + c0; }
};

enum class Direction { Stabilizing, Destabilizing };

std::string to_string(Direction d);

struct CrossingFrequency {
    double y = 0;
    double omega = 0;
    Direction direction = Direction::Destabilizing; // sign of F'(y) = 2y + c1
};

/// cos/sin of the crossing phase solved from the real/imaginary parts of
/// W(i omega) = 0, with theta the principal angle in [0, 2 pi).
struct CriticalAngle {
    double cosv = 0;
    double sinv = 0;
    double theta = 0;
};

/// Arithmetic progression of delays at which the fixed frequency omega puts a
/// root pair on the imaginary axis. exp_multiplier is 1 for e^{-lambda tau}
/// placements and 2 when the delay enters only through e^{-2 lambda tau}, in
/// which case consecutive spacing is 2 pi / (exp_multiplier * omega).
struct CriticalDelaySequence {
    double omega = 0;
    double theta = 0;
    int exp_multiplier = 1;
    Direction direction = Direction::Destabilizing;
    std::vector<double> delays; // ascending, within [0, tau_max]
    double spacing() const;
};

struct SwitchEvent {
    double tau = 0;
    Direction direction = Direction::Destabilizing;
    double omega = 0;
};

struct StableInterval {
    double lo = 0;
    double hi = 0;
    bool unbounded = false; // hi ignored when set
};

enum class EventualKind { StableForever, UnstableBeyond };

struct SwitchReport {
    BaselineStability baseline;
    int initial_unstable_roots = 0;
    double tau_max = 0;
    std::vector<SwitchEvent> events;   // axis crossings within [0, tau_max]
    std::vector<SwitchEvent> switches; // crossings where the unstable count enters/leaves zero
    int total_switch_count = 0;        // switches over all tau >= 0, not clipped
    std::vector<StableInterval> stable_intervals; // clipped to [0, tau_max]
    EventualKind eventual = EventualKind::StableForever;
    double eventual_tau = 0; // last switch when UnstableBeyond
    std::vector<std::string> annotations;

    bool stable_at(double tau) const;
};

enum class Regime {
    NoDelay,                // no delayed terms: the spectrum is tau-independent
    OwnSelfDominantUnstable,  // own-delay, |a12 a21| < |a11 a22|, unstable start: 0 switches
    OwnSelfDominantStable,    // own-delay, |a12 a21| < |a11 a22|, stable start: exactly 1
    OwnCrossDominantMulti,    // own-delay, |a12 a21| > |a11 a22|: any number possible
    CrossNoSwitch,          // cross-delay, |a12 a21| < |a11 a22|: 0 switches
    CrossAtMostOne,         // cross-delay, |a12 a21| > |a11 a22|: at most 1
    TwoTermAtMostOne,       // row/column/anti-diagonal pairs, zero-trace diagonal: at most 1
    DiagonalNearZeroMulti,  // diagonal with a11 near 0, a22 < 0, a12 a21 < 0: many possible
    FullAtMostOne,          // all terms delayed: at most 1
    NonGeneric,
    IrreducibleNumericOnly, // two irreducible exponentials: numeric treatment only
};

std::string to_string(Regime r);

struct TheoremClassification {
    Regime regime = Regime::NonGeneric;
    std::optional<int> switch_bound; // populated where the regime implies one
};

struct TrigZero {
    double omega = 0;
    int slope_sign = 0; // sign of dG/domega at the zero
};

/// F from the reduced single-exponential form. Throws NonGenericError for
/// two-exponential placements (use trig_scan / the spectral counter instead)
/// and for triadic systems (cubic |P|^2 - |Q|^2; handled by the oracle).
AuxiliaryQuadratic auxiliary_quadratic(const QuasiPolynomial& w);

/// 0, 1 or 2 entries sorted by y; with two roots the smaller is Stabilizing
/// and the larger Destabilizing. Throws NonGenericError when the discriminant
/// is within tolerance of zero. `scale` is the matrix max-norm.
std::vector<CrossingFrequency> crossing_frequencies(const AuxiliaryQuadratic& f, double scale);

/// Phase of the exponential at a crossing frequency, solved from the linear
/// system in (cos, sin) given by Re W(i omega) = Im W(i omega) = 0. This is
/// the closed form of each placement's crossing condition; for the own-delay
/// placement it reduces to
///   cos = a12 a21 a22 / (a11 (omega^2 + a22^2)),
///   sin = -omega (omega^2 + a22^2 + a12 a21) / (a11 (omega^2 + a22^2)).
CriticalAngle critical_angle(const DelaySystem& sys, double omega);
CriticalAngle critical_angle(const SingleExpForm& f, double omega);

CriticalDelaySequence critical_delays(const DelaySystem& sys, const CrossingFrequency& cf,
                                      double tau_max);

/// Full analytic switch enumeration for single-exponential placements with a
/// generic baseline. Throws NonGenericError on marginal baselines, vanishing
/// discriminant, or coincident events.
SwitchReport enumerate_switches(const DelaySystem& sys, double tau_max);

/// Variant for a MarginalCenter baseline (trace ~ 0, det > 0): the tau = 0
/// axis pair is matched against its F-root, the walk starts just after
/// tau = 0, and the report is annotated. Used by the CLI adjudication path.
SwitchReport enumerate_switches_marginal(const DelaySystem& sys, double tau_max);

TheoremClassification classify_theorem_case(const DelaySystem& sys);

/// Switch analysis for the all-terms-delayed placement via the substitution
/// z = lambda e^{lambda tau}, which satisfies z^2 - tr(A) z + det(A) = 0.
/// Every crossing is destabilizing, so at most one switch occurs.
SwitchReport zsubstitution_analysis(const DelaySystem& sys, double tau_max);

/// d Re(lambda) / d tau at a crossing of the all-terms-delayed placement.
double full_crossing_rate(double omega, double tau);

/// G_tau(omega) = |P(i omega)|^2 - |Q1(i omega) + Q2(i omega) e^{-i omega tau}|^2.
/// Zeros are necessary (modulus) conditions for purely imaginary roots.
double g_function(const QuasiPolynomial& w, double omega, double tau);

/// Frequency ceiling above which G is provably positive.
double g_scan_ceiling(const QuasiPolynomial& w);

/// All zeros of G_tau on (0, ceiling], found by sign-change bracketing and
/// bisection.
std::vector<TrigZero> trig_scan(const DelaySystem& sys, double tau);

struct SearchBox {
    double lo = -5.0;
    double hi = 5.0;
};

/// Low-discrepancy search over the box for an own-delay matrix with exactly n
/// stability switches (total over all tau). Deterministic for a fixed seed,
/// independent of thread count.
std::optional<InteractionMatrix> find_n_switch_region(Placement placement, int n, SearchBox box,
                                                      std::int64_t budget = 100000,
                                                      std::uint64_t seed = 1);

/// Total switch count of the full walk, or nullopt when the system is
/// non-generic. Convenience wrapper used by searches and scans.
std::optional<int> total_switch_count(const DelaySystem& sys);

} // namespace delstab
