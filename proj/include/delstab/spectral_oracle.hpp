#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "delstab/charpoly.hpp"
#include "delstab/switch_analysis.hpp"

namespace delstab {

/// Rectangle in the complex plane for winding-number root counts.
struct SearchRegion {
    double re_lo = 0, re_hi = 1, im_lo = -1, im_hi = 1;
};

/// Distance from the imaginary axis below which a root is reported as
/// marginal instead of being assigned a side.
inline constexpr double kAxisMargin = 1e-7;

struct SpectralVerdict {
    int unstable_count = 0;           // roots with Re > kAxisMargin
    std::complex<double> rightmost{}; // refined rightmost root
    bool stable = false;              // count == 0 and rightmost real part < -margin
    bool marginal = false;            // a root sits within the axis margin
};

/// Number of zeros of W(.; tau) inside the rectangle, counted with
/// multiplicity via the argument principle. Edges are subdivided until each
/// segment's phase increment is below pi/2; if |W| dips too low on the
/// boundary the rectangle is expanded by 1% and the count retried (up to 8
/// times). Throws VerificationError when the subdivision budget runs out.
int count_roots(const QuasiPolynomial& w, double tau, SearchRegion region);

/// Root count in the open right half-plane with an automatically sized
/// region, plus a Newton-refined rightmost root.
SpectralVerdict unstable_count(const QuasiPolynomial& w, double tau);

/// Real part of the rightmost characteristic root, located by bisecting
/// vertical lines and refining with Newton.
std::complex<double> rightmost_root(const QuasiPolynomial& w, double tau);

struct OracleAgreement {
    bool agreed = true;
    std::optional<double> first_disagreement; // tau of the first mismatch
    int samples_checked = 0;
};

/// Checks the report's stability prediction against the spectral count at
/// tau = 0, tau_max, and the midpoint of every interval between consecutive
/// events. Samples too close to an event are skipped.
OracleAgreement verify_report(const SwitchReport& report, const QuasiPolynomial& w);

struct OracleSwitch {
    double tau = 0;
    Direction direction = Direction::Destabilizing;
    int count_before = 0;
    int count_after = 0;
};

/// Stability transitions located by sampling the unstable count on a uniform
/// tau grid and bisecting each change to `refine_tol`. Used for placements
/// without a closed-form crossing analysis (general diagonal, three-delayed,
/// triads).
std::vector<OracleSwitch> oracle_switch_scan(const QuasiPolynomial& w, double tau_lo,
                                             double tau_hi, int samples = 512,
                                             double refine_tol = 1e-5);

} // namespace delstab
