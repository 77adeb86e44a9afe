#include "delstab/switch_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "delstab/errors.hpp"

namespace delstab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double tolerance_scale(const InteractionMatrix& m) { return std::max(1.0, m.max_abs()); }

// Initial number of characteristic roots with positive real part at tau = 0,
// counted as roots (a saddle contributes 1, an unstable node/focus 2).
int initial_unstable_roots(const BaselineStability& b) {
    if (b.determinant < 0) return 1;
    return b.trace > 0 ? 2 : 0;
}

struct SequenceSpec {
    double omega = 0;
    double theta = 0; // in [0, 2 pi); first positive delay is theta/(k omega)
    int k = 1;
    Direction dir = Direction::Destabilizing;
};

double first_delay(const SequenceSpec& s) { return s.theta / (static_cast<double>(s.k) * s.omega); }
double seq_spacing(const SequenceSpec& s) { return kTwoPi / (static_cast<double>(s.k) * s.omega); }

// Delay beyond which the unstable count can provably never return to zero.
// With a stabilizing sequence (omega_s) and a destabilizing one
// (omega_d > omega_s), the count after the n-th stabilizing event is
//   n0 + 2 D(tau_s(n)) - 2(n+1) >= n0 + 2 (rho (theta_s + 2 pi n) - theta_d)/(2 pi) - 2(n+1),
// rho = omega_d/omega_s, so a zero requires n <= B below.
double decision_horizon(const std::vector<SequenceSpec>& seqs, int n0, double tau_max) {
    const SequenceSpec* stab = nullptr;
    const SequenceSpec* destab = nullptr;
    for (const auto& s : seqs)
        (s.dir == Direction::Stabilizing ? stab : destab) = &s;
    if (!stab || !destab) {
        double h = tau_max;
        for (const auto& s : seqs) h = std::max(h, first_delay(s) + seq_spacing(s));
        return h + 1.0;
    }
    const double rho = destab->omega / stab->omega;
    if (rho - 1.0 < 1e-12)
        throw NonGenericError("crossing frequencies are numerically coincident");
    const double b =
        (1.0 - 0.5 * n0 + (destab->theta - rho * stab->theta) / kTwoPi) / (rho - 1.0);
    const double n_beyond = std::max(0.0, std::floor(b)) + 2.0;
    const double last_zero_candidate =
        (stab->theta + kTwoPi * n_beyond) / (static_cast<double>(stab->k) * stab->omega);
    return std::max(tau_max, last_zero_candidate) + 2.0 * seq_spacing(*destab) + 1.0;
}

std::vector<SwitchEvent> merge_events(const std::vector<SequenceSpec>& seqs, double horizon,
                                      double skip_below) {
    std::vector<SwitchEvent> evs;
    for (const auto& s : seqs) {
        const double step = seq_spacing(s);
        if (horizon / step > 2e7)
            throw NonGenericError("near-degenerate spacing produces too many crossing events");
        for (double t = first_delay(s); t <= horizon; t += step)
            if (t > skip_below) evs.push_back(SwitchEvent{t, s.dir, s.omega});
    }
    std::sort(evs.begin(), evs.end(),
              [](const SwitchEvent& a, const SwitchEvent& b) { return a.tau < b.tau; });
    for (size_t i = 1; i < evs.size(); ++i)
        if (evs[i].tau - evs[i - 1].tau <= 1e-9 * (1.0 + evs[i].tau))
            throw NonGenericError("coincident critical delays (event tie)");
    return evs;
}

SwitchReport walk_events(const std::vector<SequenceSpec>& seqs, BaselineStability base, int n0,
                         double tau_max, double skip_below) {
    SwitchReport rep;
    rep.baseline = base;
    rep.initial_unstable_roots = n0;
    rep.tau_max = tau_max;

    const double horizon = decision_horizon(seqs, n0, tau_max);
    const auto events = merge_events(seqs, horizon, skip_below);

    int count = n0;
    double stable_open = count == 0 ? 0.0 : -1.0; // lo of the currently open stable interval
    std::vector<SwitchEvent> all_switches;
    auto close_interval = [&](double hi) {
        if (stable_open >= 0.0 && stable_open < tau_max) {
            StableInterval iv{stable_open, std::min(hi, tau_max), false};
            if (iv.hi > iv.lo) rep.stable_intervals.push_back(iv);
        }
        stable_open = -1.0;
    };

    for (const auto& ev : events) {
        const int prev = count;
        count += ev.direction == Direction::Destabilizing ? 2 : -2;
        if (count < 0)
            throw NonGenericError("inconsistent crossing sequence (count went negative)");
        if (prev == 0 && count > 0) {
            all_switches.push_back(ev);
            close_interval(ev.tau);
        } else if (prev > 0 && count == 0) {
            all_switches.push_back(ev);
            stable_open = ev.tau;
        }
        if (ev.tau <= tau_max) rep.events.push_back(ev);
    }

    rep.total_switch_count = static_cast<int>(all_switches.size());
    for (const auto& s : all_switches)
        if (s.tau <= tau_max) rep.switches.push_back(s);

    if (seqs.empty()) {
        // spectrum never touches the axis: the baseline verdict holds forever
        if (count == 0) {
            rep.eventual = EventualKind::StableForever;
            rep.stable_intervals.push_back(StableInterval{0.0, 0.0, true});
        } else {
            rep.eventual = EventualKind::UnstableBeyond;
            rep.eventual_tau = 0.0;
        }
        return rep;
    }
    // destabilizing events recur forever and the horizon passed the last
    // possible zero, so the system ends unstable
    if (count == 0)
        throw NonGenericError("event walk ended stable past the decision horizon (inconsistent)");
    close_interval(horizon);
    rep.eventual = EventualKind::UnstableBeyond;
    rep.eventual_tau = all_switches.empty() ? 0.0 : all_switches.back().tau;
    return rep;
}

std::vector<SequenceSpec> build_sequences(const DelaySystem& sys, const SingleExpForm& f,
                                          const std::vector<CrossingFrequency>& freqs) {
    std::vector<SequenceSpec> seqs;
    for (const auto& cf : freqs) {
        const CriticalAngle ang = critical_angle(f, cf.omega);
        seqs.push_back(SequenceSpec{cf.omega, ang.theta, f.exp_multiplier, cf.direction});
    }
    return seqs;
}

} // namespace

std::string to_string(Direction d) {
    return d == Direction::Stabilizing ? "stabilizing" : "destabilizing";
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::NoDelay:                 return "no_delay";
        case Regime::OwnSelfDominantUnstable: return "own_self_dominant_unstable";
        case Regime::OwnSelfDominantStable:   return "own_self_dominant_stable";
        case Regime::OwnCrossDominantMulti:   return "own_cross_dominant_multi";
        case Regime::CrossNoSwitch:           return "cross_no_switch";
        case Regime::CrossAtMostOne:          return "cross_at_most_one";
        case Regime::TwoTermAtMostOne:        return "two_term_at_most_one";
        case Regime::DiagonalNearZeroMulti:   return "diagonal_near_zero_multi";
        case Regime::FullAtMostOne:           return "full_at_most_one";
        case Regime::NonGeneric:              return "non_generic";
        case Regime::IrreducibleNumericOnly:  return "irreducible_numeric_only";
    }
    return "?";
}

double CriticalDelaySequence::spacing() const {
    return kTwoPi / (static_cast<double>(exp_multiplier) * omega);
}

bool SwitchReport::stable_at(double tau) const {
    for (const auto& iv : stable_intervals)
        if (tau >= iv.lo && (iv.unbounded || tau < iv.hi)) return true;
    return false;
}

AuxiliaryQuadratic auxiliary_quadratic(const QuasiPolynomial& w) {
    const SingleExpForm f = single_exp_form(w);
    if (f.p.degree() != 2)
        throw NonGenericError("auxiliary quadratic requires a planar quasi-polynomial");
    // |P(i w)|^2 = w^4 + (p1^2 - 2 p0) w^2 + p0^2 for monic P,
    // |Q(i w)|^2 = q1^2 w^2 + q0^2.
    const double p0 = f.p.coeff(0), p1 = f.p.coeff(1);
    const double q0 = f.q.coeff(0), q1 = f.q.coeff(1);
    AuxiliaryQuadratic aq;
    aq.c1 = p1 * p1 - 2.0 * p0 - q1 * q1;
    aq.c0 = p0 * p0 - q0 * q0;
    return aq;
}

std::vector<CrossingFrequency> crossing_frequencies(const AuxiliaryQuadratic& f, double scale) {
    const double s2 = std::max(1.0, scale * scale);
    const double delta = f.delta();
    if (std::abs(delta) <= kMarginalTol * s2 * s2)
        throw NonGenericError("auxiliary discriminant within tolerance of zero");
    std::vector<CrossingFrequency> out;
    if (delta < 0) return out;
    const double r = std::sqrt(delta);
    const double roots[2] = {0.5 * (-f.c1 - r), 0.5 * (-f.c1 + r)};
    for (int i = 0; i < 2; ++i) {
        if (roots[i] <= kMarginalTol * s2) continue; // y ~ 0 would mean a zero root, non-generic
        CrossingFrequency cf;
        cf.y = roots[i];
        cf.omega = std::sqrt(roots[i]);
        // F'(y) = 2y + c1 = -sqrt(delta) at the smaller root, +sqrt(delta) at the larger
        cf.direction = (2.0 * roots[i] + f.c1) > 0 ? Direction::Destabilizing
                                                   : Direction::Stabilizing;
        out.push_back(cf);
    }
    return out;
}

CriticalAngle critical_angle(const SingleExpForm& f, double omega) {
    // W(i w) = 0 with E = cos(k w tau) - i sin(k w tau) gives the linear system
    //   Qr C + Qi S = -Pr
    //   Qi C - Qr S = -Pi
    // in C = cos(k w tau), S = sin(k w tau).
    const std::complex<double> iw{0.0, omega};
    const std::complex<double> P = f.p.eval(iw);
    const std::complex<double> Q = f.q.eval(iw);
    const double m2 = std::norm(Q);
    if (m2 <= 1e-24 * (1.0 + std::norm(P)))
        throw NonGenericError("exponential coefficient vanishes at the crossing frequency");
    CriticalAngle a;
    a.cosv = -(P.real() * Q.real() + P.imag() * Q.imag()) / m2;
    a.sinv = (P.imag() * Q.real() - P.real() * Q.imag()) / m2;
    if (std::abs(a.cosv * a.cosv + a.sinv * a.sinv - 1.0) > 1e-6)
        throw NonGenericError("crossing phase is inconsistent (omega is not a crossing frequency)");
    a.theta = std::atan2(a.sinv, a.cosv);
    if (a.theta < 0) a.theta += kTwoPi;
    return a;
}

CriticalAngle critical_angle(const DelaySystem& sys, double omega) {
    return critical_angle(single_exp_form(quasi_polynomial(sys)), omega);
}

CriticalDelaySequence critical_delays(const DelaySystem& sys, const CrossingFrequency& cf,
                                      double tau_max) {
    if (!(tau_max > 0)) throw ConfigError("tau_max must be positive");
    const SingleExpForm f = single_exp_form(quasi_polynomial(sys));
    const CriticalAngle ang = critical_angle(f, cf.omega);
    CriticalDelaySequence seq;
    seq.omega = cf.omega;
    seq.theta = ang.theta;
    seq.exp_multiplier = f.exp_multiplier;
    seq.direction = cf.direction;
    for (double t = ang.theta / (f.exp_multiplier * cf.omega); t <= tau_max; t += seq.spacing())
        seq.delays.push_back(t);
    return seq;
}

SwitchReport enumerate_switches(const DelaySystem& sys, double tau_max) {
    if (!(tau_max > 0)) throw ConfigError("tau_max must be positive");
    const QuasiPolynomial w = quasi_polynomial(sys);
    const SingleExpForm f = single_exp_form(w); // throws for two-exponential placements
    const BaselineStability base = classify_baseline(effective_tau0_matrix(sys));
    if (base.is_marginal())
        throw NonGenericError("baseline is marginal (" + to_string(base.verdict) +
                              "); switch enumeration refused");
    const int n0 = initial_unstable_roots(base);

    std::vector<SequenceSpec> seqs;
    if (!f.q.is_zero()) {
        const AuxiliaryQuadratic aq = auxiliary_quadratic(w);
        const auto freqs = crossing_frequencies(aq, tolerance_scale(sys.matrix));
        seqs = build_sequences(sys, f, freqs);
        for (const auto& s : seqs)
            if (first_delay(s) <= 1e-9)
                throw NonGenericError("critical delay at tau ~ 0 with a generic baseline");
    }
    return walk_events(seqs, base, n0, tau_max, 0.0);
}

SwitchReport enumerate_switches_marginal(const DelaySystem& sys, double tau_max) {
    if (!(tau_max > 0)) throw ConfigError("tau_max must be positive");
    const QuasiPolynomial w = quasi_polynomial(sys);
    const SingleExpForm f = single_exp_form(w);
    const BaselineStability base = classify_baseline(effective_tau0_matrix(sys));
    if (base.verdict != BaselineVerdict::MarginalCenter)
        throw NonGenericError("adjudicated enumeration applies to marginal-center baselines only");

    // At tau = 0 the spectrum is the pair +- i sqrt(det); its squared
    // frequency must be a zero of F.
    const double yc = base.determinant;
    const AuxiliaryQuadratic aq = auxiliary_quadratic(w);
    const double scale = tolerance_scale(sys.matrix);
    const double ftol = 1e-6 * scale * scale * scale * scale;
    if (std::abs(aq.eval(yc)) > ftol)
        throw NonGenericError("marginal baseline pair does not match an auxiliary-function zero");

    const auto freqs = crossing_frequencies(aq, scale);
    int n0 = 0; // no strictly-right roots at tau = 0 (trace = 0, det > 0)
    std::vector<SequenceSpec> seqs;
    for (const auto& cf : freqs) {
        CriticalAngle ang = critical_angle(f, cf.omega);
        const bool is_axis_pair = std::abs(cf.y - yc) <= 1e-6 * std::max(1.0, std::abs(yc));
        if (is_axis_pair) {
            // the tau = 0 touch is the baseline itself, not an event; the pair
            // leaves the axis in the direction F' dictates
            if (ang.theta > kTwoPi - 1e-6 || ang.theta < 1e-6) ang.theta = 0.0;
            if (cf.direction == Direction::Destabilizing) n0 = 2;
            SequenceSpec s{cf.omega, ang.theta, f.exp_multiplier, cf.direction};
            if (ang.theta == 0.0) s.theta = kTwoPi; // first event one full turn later
            seqs.push_back(s);
        } else {
            seqs.push_back(SequenceSpec{cf.omega, ang.theta, f.exp_multiplier, cf.direction});
        }
    }
    SwitchReport rep = walk_events(seqs, base, n0, tau_max, 1e-9);
    rep.annotations.push_back(
        "adjudicated-marginal-baseline: trace ~ 0 puts the tau=0 spectrum on the imaginary axis; "
        "the walk starts from tau = 0+ and was cross-checked against the spectral root counter");
    return rep;
}

TheoremClassification classify_theorem_case(const DelaySystem& sys) {
    const Placement pk = sys.placement.kind;
    TheoremClassification tc;
    if (sys.placement.is_triad()) {
        tc.regime = Regime::IrreducibleNumericOnly;
        return tc;
    }
    if (pk == Placement::None) {
        tc.regime = Regime::NoDelay;
        tc.switch_bound = 0;
        return tc;
    }
    if (pk == Placement::PureCross) {
        tc.regime = Regime::NonGeneric; // trace is identically zero
        return tc;
    }
    const InteractionMatrix m = sys.matrix;
    const double scale = tolerance_scale(m);
    const BaselineStability base = classify_baseline(effective_tau0_matrix(sys));
    const double cross = std::abs(m.a12 * m.a21);
    // MixedSelf shifts the free term of F; the comparison follows its c0
    const double own = pk == Placement::MixedSelf
                           ? std::abs(sys.placement.a13 * m.a22 - m.a12 * m.a21)
                           : cross;
    const double self_prod = std::abs(m.a11 * m.a22);

    switch (pk) {
        case Placement::Own:
        case Placement::MixedSelf: {
            const double lhs = pk == Placement::MixedSelf ? own : cross;
            if (base.is_marginal() || std::abs(lhs - self_prod) <= kMarginalTol * scale * scale) {
                tc.regime = Regime::NonGeneric;
                return tc;
            }
            if (lhs < self_prod) {
                if (base.verdict == BaselineVerdict::Stable) {
                    tc.regime = Regime::OwnSelfDominantStable;
                    tc.switch_bound = 1;
                } else {
                    tc.regime = Regime::OwnSelfDominantUnstable;
                    tc.switch_bound = 0;
                }
            } else {
                tc.regime = Regime::OwnCrossDominantMulti;
            }
            return tc;
        }
        case Placement::Cross: {
            if (base.is_marginal() || std::abs(cross - self_prod) <= kMarginalTol * scale * scale) {
                tc.regime = Regime::NonGeneric;
                return tc;
            }
            if (cross < self_prod) {
                tc.regime = Regime::CrossNoSwitch;
                tc.switch_bound = 0;
            } else {
                tc.regime = Regime::CrossAtMostOne;
                tc.switch_bound = 1;
            }
            return tc;
        }
        case Placement::RowR:
        case Placement::ColR:
        case Placement::AntiDiagonal:
            tc.regime = base.is_marginal() ? Regime::NonGeneric : Regime::TwoTermAtMostOne;
            if (!base.is_marginal()) tc.switch_bound = 1;
            return tc;
        case Placement::Diagonal: {
            if (std::abs(m.trace()) <= kMarginalTol * scale) {
                tc.regime = Regime::TwoTermAtMostOne;
                tc.switch_bound = 1;
                return tc;
            }
            const bool near_zero_self = std::abs(m.a11) <= 1e-3 * scale;
            if (near_zero_self && m.a22 < 0 && m.a12 * m.a21 < 0 &&
                m.a22 * m.a22 > 4.0 * std::abs(m.a12 * m.a21)) {
                tc.regime = Regime::DiagonalNearZeroMulti;
                return tc;
            }
            tc.regime = Regime::IrreducibleNumericOnly;
            return tc;
        }
        case Placement::ThreeOwnLast:
        case Placement::ThreeCrossLast:
            tc.regime = Regime::IrreducibleNumericOnly;
            return tc;
        case Placement::Full:
            tc.regime = base.is_marginal() ? Regime::NonGeneric : Regime::FullAtMostOne;
            if (!base.is_marginal()) tc.switch_bound = 1;
            return tc;
        default:
            tc.regime = Regime::NonGeneric;
            return tc;
    }
}

double full_crossing_rate(double omega, double tau) {
    return omega * omega / (1.0 + omega * omega * tau * tau);
}

SwitchReport zsubstitution_analysis(const DelaySystem& sys, double tau_max) {
    if (sys.placement.kind != Placement::Full)
        throw ConfigError("z-substitution analysis applies to the all-terms-delayed placement");
    if (!(tau_max > 0)) throw ConfigError("tau_max must be positive");
    const BaselineStability base = classify_baseline(sys.matrix);
    if (base.is_marginal())
        throw NonGenericError("baseline is marginal; z-substitution analysis refused");
    const int n0 = initial_unstable_roots(base);

    // lambda e^{lambda tau} = z with z^2 + a z + b = 0, a = -tr A, b = det A.
    const double a = -base.trace;
    const double b = base.determinant;
    const double scale = tolerance_scale(sys.matrix);
    const double disc = a * a - 4.0 * b;
    if (std::abs(disc) <= kMarginalTol * scale * scale)
        throw NonGenericError("coincident z-roots (double crossing), non-generic");

    std::vector<std::complex<double>> zroots;
    if (disc > 0) {
        const double r = std::sqrt(disc);
        zroots.emplace_back(0.5 * (-a - r), 0.0);
        zroots.emplace_back(0.5 * (-a + r), 0.0);
    } else {
        const double r = std::sqrt(-disc);
        zroots.emplace_back(-0.5 * a, 0.5 * r);
        zroots.emplace_back(-0.5 * a, -0.5 * r);
    }

    // For lambda = i omega (omega > 0): z = i omega e^{i omega tau} has
    // modulus omega and argument pi/2 + omega tau, so each z-root generates
    // one delay sequence with spacing 2 pi / omega.
    std::vector<SequenceSpec> seqs;
    for (const auto& z : zroots) {
        const double omega = std::abs(z);
        if (omega <= kMarginalTol * scale)
            throw NonGenericError("z-root at the origin (zero characteristic root)");
        double theta = std::arg(z) - 0.5 * M_PI; // = omega tau mod 2 pi
        while (theta < 0) theta += kTwoPi;
        while (theta >= kTwoPi) theta -= kTwoPi;
        // theta ~ 0 would put a crossing at tau = 0, impossible for a generic
        // baseline; the first admissible delay is one full turn later
        if (theta <= 1e-9) theta += kTwoPi;
        seqs.push_back(SequenceSpec{omega, theta, 1, Direction::Destabilizing});
    }
    SwitchReport rep = walk_events(seqs, base, n0, tau_max, 0.0);
    return rep;
}

double g_function(const QuasiPolynomial& w, double omega, double tau) {
    const std::complex<double> iw{0.0, omega};
    const std::complex<double> e = std::exp(std::complex<double>{0.0, -omega * tau});
    return std::norm(w.p.eval(iw)) - std::norm(w.q1.eval(iw) + w.q2.eval(iw) * e);
}

double g_scan_ceiling(const QuasiPolynomial& w) {
    // Beyond y = omega^2 exceeding the positive-root bound of
    //   y^2 + h1 y + h0 <= |P(i w)|^2 - (|Q1| + |Q2|)^2,
    // G is positive, so no crossing frequency survives. The coefficient-based
    // floor 2 (1 + max|coeff|) dim is kept as a minimum.
    const double p0 = w.p.coeff(0), p1 = w.p.coeff(1);
    const double q10 = w.q1.coeff(0), q11 = w.q1.coeff(1);
    const double q20 = w.q2.coeff(0), q21 = w.q2.coeff(1);
    const double h1 = p1 * p1 - 2.0 * p0 - 2.0 * (q11 * q11 + q21 * q21);
    const double h0 = p0 * p0 - 2.0 * (q10 * q10 + q20 * q20);
    const double y_hi = std::abs(h1) + std::sqrt(std::abs(h0)) + 1.0;

    double mx = 0.0;
    for (const Poly* poly : {&w.p, &w.q1, &w.q2})
        for (double c : poly->c) mx = std::max(mx, std::abs(c));
    const double floor_bound = 2.0 * (1.0 + mx) * static_cast<double>(w.dim);
    return std::max(floor_bound, std::sqrt(y_hi));
}

std::vector<TrigZero> trig_scan(const DelaySystem& sys, double tau) {
    if (tau < 0) throw ConfigError("tau must be nonnegative");
    const QuasiPolynomial w = quasi_polynomial(sys);
    if (w.p.degree() != 2)
        throw ConfigError("trigonometric scan is defined for planar systems");
    const double omega_hi = g_scan_ceiling(w);
    if (!(g_function(w, omega_hi, tau) > 0.0))
        throw NonGenericError("G-scan ceiling failed to majorize (unexpected)");

    const int n = 4096;
    const double step = omega_hi / n;
    std::vector<TrigZero> zeros;
    double prev_om = step * 1e-3; // stay off omega = 0
    double prev_g = g_function(w, prev_om, tau);
    for (int i = 1; i <= n; ++i) {
        const double om = step * i;
        const double g = g_function(w, om, tau);
        if ((prev_g < 0 && g >= 0) || (prev_g > 0 && g <= 0)) {
            double lo = prev_om, hi = om, glo = prev_g;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double gm = g_function(w, mid, tau);
                if ((glo < 0) == (gm < 0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            TrigZero z;
            z.omega = 0.5 * (lo + hi);
            z.slope_sign = prev_g < 0 ? +1 : -1;
            zeros.push_back(z);
        }
        prev_om = om;
        prev_g = g;
    }
    return zeros;
}

std::optional<int> total_switch_count(const DelaySystem& sys) {
    try {
        if (sys.placement.kind == Placement::Full)
            return zsubstitution_analysis(sys, 1.0).total_switch_count;
        return enumerate_switches(sys, 1.0).total_switch_count;
    } catch (const NonGenericError&) {
        return std::nullopt;
    }
}

namespace {

// Deterministic low-discrepancy 4d points (Halton, bases 2/3/5/7).
double halton(std::uint64_t index, std::uint64_t base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

InteractionMatrix halton_matrix(std::uint64_t idx, const SearchBox& box, std::uint64_t seed) {
    static const std::uint64_t bases[4] = {2, 3, 5, 7};
    const double span = box.hi - box.lo;
    double a[4];
    for (int d = 0; d < 4; ++d) {
        double u = halton(idx + 1 + seed * 7919, bases[d]);
        a[d] = box.lo + span * u;
    }
    return InteractionMatrix::planar(a[0], a[1], a[2], a[3]);
}

} // namespace

std::optional<InteractionMatrix> find_n_switch_region(Placement placement, int n, SearchBox box,
                                                      std::int64_t budget, std::uint64_t seed) {
    if (placement != Placement::Own)
        throw ConfigError("witness search is implemented for the own-delay placement");
    if (n < 0 || !(box.hi > box.lo)) throw ConfigError("invalid search box or target count");

    const std::int64_t phase1 = std::max<std::int64_t>(1, budget * 3 / 4);
    std::int64_t best_idx = phase1; // sentinel: past the end

#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(min : best_idx) if (phase1 > 4096)
#endif
    for (std::int64_t i = 0; i < phase1; ++i) {
        const InteractionMatrix m = halton_matrix(static_cast<std::uint64_t>(i), box, seed);
        const auto c = total_switch_count(DelaySystem{m, DelayPlacement{placement}});
        if (c && *c == n && i < best_idx) best_idx = i;
    }
    if (best_idx < phase1)
        return halton_matrix(static_cast<std::uint64_t>(best_idx), box, seed);

    // Local refinement: jitter around the closest misses from a coarse pass.
    std::int64_t remaining = budget - phase1;
    std::vector<std::pair<int, std::uint64_t>> near; // (|count-n|, index)
    for (std::int64_t i = 0; i < std::min<std::int64_t>(phase1, 4096); ++i) {
        const InteractionMatrix m = halton_matrix(static_cast<std::uint64_t>(i), box, seed);
        const auto c = total_switch_count(DelaySystem{m, DelayPlacement{placement}});
        if (c) near.emplace_back(std::abs(*c - n), static_cast<std::uint64_t>(i));
    }
    std::sort(near.begin(), near.end());
    const double span = box.hi - box.lo;
    for (size_t t = 0; t < near.size() && remaining > 0; ++t) {
        const InteractionMatrix center = halton_matrix(near[t].second, box, seed);
        for (int j = 0; j < 256 && remaining > 0; ++j, --remaining) {
            std::uint64_t h = seed * 0x9e3779b97f4a7c15ull + near[t].second * 0x2545f4914f6cdd1dull +
                              static_cast<std::uint64_t>(j) * 0xda942042e4dd58b5ull;
            auto next = [&h]() {
                h ^= h >> 33; h *= 0xff51afd7ed558ccdull; h ^= h >> 33;
                return static_cast<double>(h >> 11) * 0x1.0p-53;
            };
            InteractionMatrix m = center;
            const double radius = 0.05 * span * std::pow(0.97, j);
            m.a11 += radius * (2.0 * next() - 1.0);
            m.a12 += radius * (2.0 * next() - 1.0);
            m.a21 += radius * (2.0 * next() - 1.0);
            m.a22 += radius * (2.0 * next() - 1.0);
            m.a11 = std::clamp(m.a11, box.lo, box.hi);
            m.a12 = std::clamp(m.a12, box.lo, box.hi);
            m.a21 = std::clamp(m.a21, box.lo, box.hi);
            m.a22 = std::clamp(m.a22, box.lo, box.hi);
            const auto c = total_switch_count(DelaySystem{m, DelayPlacement{placement}});
            if (c && *c == n) return m;
        }
    }
    return std::nullopt;
}

} // namespace delstab
