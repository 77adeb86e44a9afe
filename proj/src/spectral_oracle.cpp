#include "delstab/spectral_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "delstab/errors.hpp"

namespace delstab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double coeff_scale(const QuasiPolynomial& w) {
    return 1.0 + w.p.abs_coeff_sum() + w.q1.abs_coeff_sum() + w.q2.abs_coeff_sum();
}

// Phase change of W along the segment [z0, z1], subdividing until each piece
// turns by less than pi/2 so the branch of arg is tracked unambiguously.
// `low_watermark` records the smallest |W| seen relative to the local scale.
double edge_phase(const QuasiPolynomial& w, double tau, std::complex<double> z0,
                  std::complex<double> z1, double abs_floor, long& budget, bool& too_close) {
    struct Seg {
        std::complex<double> a, b, wa, wb;
        int depth;
    };
    std::vector<Seg> stack;
    const std::complex<double> w0 = evaluate(w, z0, tau);
    const std::complex<double> w1 = evaluate(w, z1, tau);
    stack.push_back(Seg{z0, z1, w0, w1, 0});
    double total = 0.0;
    while (!stack.empty()) {
        Seg s = stack.back();
        stack.pop_back();
        if (--budget < 0)
            throw VerificationError("argument-principle subdivision budget exhausted");
        if (std::abs(s.wa) < abs_floor || std::abs(s.wb) < abs_floor) {
            too_close = true;
            return 0.0;
        }
        const double dphi = std::arg(s.wb / s.wa);
        if (std::abs(dphi) < M_PI / 2.0 && s.depth > 0) {
            total += dphi;
            continue;
        }
        if (s.depth > 60)
            throw VerificationError("argument-principle subdivision depth exhausted");
        const std::complex<double> mid = 0.5 * (s.a + s.b);
        const std::complex<double> wm = evaluate(w, mid, tau);
        stack.push_back(Seg{s.a, mid, s.wa, wm, s.depth + 1});
        stack.push_back(Seg{mid, s.b, wm, s.wb, s.depth + 1});
    }
    return total;
}

std::optional<int> try_count(const QuasiPolynomial& w, double tau, const SearchRegion& rg,
                             double abs_floor) {
    const std::complex<double> c1{rg.re_lo, rg.im_lo};
    const std::complex<double> c2{rg.re_hi, rg.im_lo};
    const std::complex<double> c3{rg.re_hi, rg.im_hi};
    const std::complex<double> c4{rg.re_lo, rg.im_hi};
    long budget = 4000000;
    bool too_close = false;
    double total = 0.0;
    for (const auto& [a, b] :
         {std::pair{c1, c2}, std::pair{c2, c3}, std::pair{c3, c4}, std::pair{c4, c1}}) {
        total += edge_phase(w, tau, a, b, abs_floor, budget, too_close);
        if (too_close) return std::nullopt;
    }
    const double winding = total / kTwoPi;
    const long n = std::lround(winding);
    if (std::abs(winding - static_cast<double>(n)) > 0.25)
        throw VerificationError("winding number failed to converge to an integer");
    return static_cast<int>(n);
}

} // namespace

int count_roots(const QuasiPolynomial& w, double tau, SearchRegion region) {
    if (!(region.re_lo < region.re_hi) || !(region.im_lo < region.im_hi))
        throw ConfigError("degenerate search region");
    const double abs_floor = 1e-10 * coeff_scale(w);
    for (int attempt = 0; attempt <= 8; ++attempt) {
        if (auto n = try_count(w, tau, region, abs_floor)) return *n;
        // a boundary point came too close to a root: expand by 1% and retry
        const double dre = 0.01 * (region.re_hi - region.re_lo);
        const double dim = 0.01 * (region.im_hi - region.im_lo);
        region.re_lo -= dre;
        region.re_hi += dre;
        region.im_lo -= dim;
        region.im_hi += dim;
    }
    throw VerificationError("root near the contour persisted through 8 boundary expansions");
}

namespace {

// Newton with analytic derivative, secant fallback on stagnation.
std::optional<std::complex<double>> refine_root(const QuasiPolynomial& w, double tau,
                                                std::complex<double> z0, double scale) {
    std::complex<double> z = z0;
    std::complex<double> prev_z = z0 + 1e-4;
    std::complex<double> prev_f = evaluate(w, prev_z, tau);
    for (int it = 0; it < 50; ++it) {
        const std::complex<double> f = evaluate(w, z, tau);
        if (std::abs(f) < 1e-12 * scale) return z;
        const std::complex<double> df = evaluate_derivative(w, z, tau);
        std::complex<double> step;
        if (std::abs(df) > 1e-300) {
            step = f / df;
        } else if (std::abs(f - prev_f) > 1e-300) {
            step = f * (z - prev_z) / (f - prev_f); // secant
        } else {
            return std::nullopt;
        }
        prev_z = z;
        prev_f = f;
        if (std::abs(step) > 10.0) step *= 10.0 / std::abs(step);
        z -= step;
    }
    const std::complex<double> f = evaluate(w, z, tau);
    if (std::abs(f) < 1e-9 * scale) return z;
    return std::nullopt;
}

SearchRegion auto_region(const QuasiPolynomial& w, double re_lo) {
    const double r = 1.05 * w.right_half_plane_root_bound() + 0.5;
    SearchRegion rg;
    rg.re_lo = re_lo;
    rg.re_hi = std::max(1.0, r);
    rg.im_lo = -r;
    rg.im_hi = r;
    return rg;
}

// Rightmost root inside [x_lo, x_hi] x [-im, im], refined from seeds on a
// grid over the strip. Assumes the strip is known to contain >= 1 root.
std::optional<std::complex<double>> refine_in_strip(const QuasiPolynomial& w, double tau,
                                                    double x_lo, double x_hi, double im_hi) {
    const double scale = coeff_scale(w);
    std::optional<std::complex<double>> best;
    const int nx = 5, ny = 48;
    for (int i = 0; i < nx; ++i) {
        const double x = x_lo + (x_hi - x_lo) * (i + 0.5) / nx;
        for (int j = 0; j <= ny; ++j) {
            const double y = -im_hi + 2.0 * im_hi * j / ny;
            if (auto r = refine_root(w, tau, {x, y}, scale)) {
                if (r->real() <= x_hi + 0.5 && r->real() >= x_lo - 1.0)
                    if (!best || r->real() > best->real()) best = r;
            }
        }
    }
    return best;
}

} // namespace

namespace {

// In the strip Re(lambda) in [x, 0], |e^{-lambda tau}| <= e^{|x| tau}, so the
// imaginary parts of roots obey the inflated Fujiwara bound.
double strip_im_bound(const QuasiPolynomial& w, double tau, double x) {
    return w.right_half_plane_root_bound() * std::exp(2.0 * std::abs(x) * tau) + 1.0;
}

} // namespace

std::complex<double> rightmost_root(const QuasiPolynomial& w, double tau) {
    const SearchRegion full = auto_region(w, 0.0);
    constexpr double kImCap = 1e5; // deeper strips than this are not resolved

    auto strip_count = [&](double x_lo, double x_hi, double im) {
        SearchRegion rg;
        rg.re_lo = x_lo;
        rg.re_hi = x_hi;
        rg.im_lo = -im;
        rg.im_hi = im;
        return count_roots(w, tau, rg);
    };

    double lo = 0.0, hi = 0.0;
    if (strip_count(kAxisMargin * 0.5, full.re_hi, full.im_hi) > 0) {
        lo = 0.0;
        hi = full.re_hi;
        // bisect until only the rightmost root's thin strip remains
        for (int it = 0; it < 60 && hi - lo > 1e-6; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (strip_count(mid, full.re_hi, full.im_hi) > 0)
                lo = mid;
            else
                hi = mid;
        }
    } else {
        // rightmost root lies left of the axis: march leftward in widening
        // strips, each with its own imaginary bound
        double width = 0.125;
        double x = 0.0;
        while (true) {
            const double x_next = x - width;
            const double im = strip_im_bound(w, tau, x_next);
            if (im > kImCap)
                return {x, 0.0}; // best effort: rightmost is left of x
            if (strip_count(x_next, kAxisMargin, im) > 0) {
                lo = x_next;
                hi = x;
                break;
            }
            x = x_next;
            width *= 2.0;
            if (x < -1e4) throw VerificationError("no characteristic roots found (unexpected)");
        }
        const double im = strip_im_bound(w, tau, lo);
        for (int it = 0; it < 60 && hi - lo > 1e-6; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (strip_count(mid, hi, im) > 0)
                lo = mid;
            else
                hi = mid;
        }
    }
    const double im = std::min(kImCap, strip_im_bound(w, tau, lo));
    if (auto r = refine_in_strip(w, tau, lo - 1e-4, hi + 1e-4, im)) return *r;
    // fall back to the strip estimate on the real axis
    return {0.5 * (lo + hi), 0.0};
}

SpectralVerdict unstable_count(const QuasiPolynomial& w, double tau) {
    if (tau < 0) throw ConfigError("tau must be nonnegative");
    SpectralVerdict v;
    v.unstable_count = count_roots(w, tau, auto_region(w, kAxisMargin));
    const int wide = count_roots(w, tau, auto_region(w, -kAxisMargin));
    v.marginal = wide != v.unstable_count;
    v.rightmost = rightmost_root(w, tau);
    v.stable = !v.marginal && v.unstable_count == 0 && v.rightmost.real() < -kAxisMargin;
    return v;
}

OracleAgreement verify_report(const SwitchReport& report, const QuasiPolynomial& w) {
    OracleAgreement res;
    std::vector<double> cuts{0.0};
    for (const auto& ev : report.events) cuts.push_back(ev.tau);
    cuts.push_back(report.tau_max);

    std::vector<double> samples;
    samples.push_back(0.0);
    for (size_t i = 0; i + 1 < cuts.size(); ++i)
        samples.push_back(0.5 * (cuts[i] + cuts[i + 1]));
    samples.push_back(report.tau_max);

    auto near_event = [&](double t) {
        for (const auto& ev : report.events)
            if (std::abs(t - ev.tau) < 1e-4 * (1.0 + t)) return true;
        return false;
    };

    for (double t : samples) {
        if (near_event(t)) continue;
        if (t == 0.0 && report.baseline.is_marginal()) continue; // axis roots at tau = 0
        const bool predicted_stable = report.stable_at(t);
        const SpectralVerdict v = unstable_count(w, t);
        ++res.samples_checked;
        const bool oracle_stable = v.unstable_count == 0 && !v.marginal;
        if (oracle_stable != predicted_stable) {
            res.agreed = false;
            if (!res.first_disagreement) res.first_disagreement = t;
        }
    }
    return res;
}

std::vector<OracleSwitch> oracle_switch_scan(const QuasiPolynomial& w, double tau_lo,
                                             double tau_hi, int samples, double refine_tol) {
    if (!(tau_hi > tau_lo) || samples < 2) throw ConfigError("invalid oracle scan window");
    std::vector<OracleSwitch> out;
    // plain right-half-plane counts; the rightmost-root refinement is not
    // needed to see stability flips
    auto rhp_count = [&](double t) { return count_roots(w, t, auto_region(w, kAxisMargin)); };
    const double step = (tau_hi - tau_lo) / samples;
    int prev_count = rhp_count(tau_lo);
    double prev_tau = tau_lo;
    for (int i = 1; i <= samples; ++i) {
        const double t = tau_lo + step * i;
        const int c = rhp_count(t);
        if ((c == 0) != (prev_count == 0)) {
            // bisect the stability transition
            double lo = prev_tau, hi = t;
            int lo_count = prev_count;
            while (hi - lo > refine_tol) {
                const double mid = 0.5 * (lo + hi);
                const int mc = rhp_count(mid);
                if ((mc == 0) == (lo_count == 0)) {
                    lo = mid;
                    lo_count = mc;
                } else {
                    hi = mid;
                }
            }
            OracleSwitch sw;
            sw.tau = 0.5 * (lo + hi);
            sw.count_before = prev_count;
            sw.count_after = c;
            sw.direction = c > prev_count ? Direction::Destabilizing : Direction::Stabilizing;
            out.push_back(sw);
        }
        prev_count = c;
        prev_tau = t;
    }
    return out;
}

} // namespace delstab
