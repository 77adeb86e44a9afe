#include "delstab/charpoly.hpp"

#include <algorithm>
#include <cmath>

#include "delstab/errors.hpp"

namespace delstab {

namespace {

// Planar forms are written against the expansion of
// det(lambda I - A_inst - A_del e^{-lambda tau}).
QuasiPolynomial planar_quasi(const InteractionMatrix& m, const DelayPlacement& pl) {
    const double a11 = m.a11, a12 = m.a12, a21 = m.a21, a22 = m.a22;
    QuasiPolynomial w;
    w.tag = pl.kind;
    w.dim = 2;
    switch (pl.kind) {
        case Placement::None:
            w.p = Poly{{a11 * a22 - a12 * a21, -(a11 + a22), 1.0}};
            break;
        case Placement::Own:
            w.p = Poly{{-a12 * a21, -a22, 1.0}};
            w.q1 = Poly{{a11 * a22, -a11}};
            break;
        case Placement::Cross:
        case Placement::PureCross:
            w.p = Poly{{a11 * a22, -(a11 + a22), 1.0}};
            w.q1 = Poly{{-a12 * a21}};
            break;
        case Placement::RowR:
        case Placement::ColR:
            // both rows/columns give the same expansion
            w.p = Poly{{0.0, -a22, 1.0}};
            w.q1 = Poly{{a11 * a22 - a12 * a21, -a11}};
            break;
        case Placement::Diagonal:
            w.p = Poly{{-a12 * a21, 0.0, 1.0}};
            w.q1 = Poly{{0.0, -(a11 + a22)}};
            w.q2 = Poly{{a11 * a22}};
            break;
        case Placement::AntiDiagonal:
            w.p = Poly{{a11 * a22, -(a11 + a22), 1.0}};
            w.q2 = Poly{{-a12 * a21}};
            break;
        case Placement::ThreeOwnLast:
            w.p = Poly{{0.0, -a22, 1.0}};
            w.q1 = Poly{{a11 * a22, -a11}};
            w.q2 = Poly{{-a12 * a21}};
            break;
        case Placement::ThreeCrossLast:
            w.p = Poly{{0.0, 0.0, 1.0}};
            w.q1 = Poly{{-a12 * a21, -(a11 + a22)}};
            w.q2 = Poly{{a11 * a22}};
            break;
        case Placement::Full:
            w.p = Poly{{0.0, 0.0, 1.0}};
            w.q1 = Poly{{0.0, -(a11 + a22)}};
            w.q2 = Poly{{a11 * a22 - a12 * a21}};
            break;
        case Placement::MixedSelf: {
            const double a13 = pl.a13;
            w.p = Poly{{a13 * a22 - a12 * a21, -(a22 + a13), 1.0}};
            w.q1 = Poly{{a11 * a22, -a11}};
            break;
        }
        default:
            throw ConfigError("planar quasi-polynomial requested for a triad placement");
    }
    return w;
}

// Cofactor expansion of the 3x3 characteristic matrix, specialized per
// placement (only two triad topologies are supported, so the expansions are
// kept explicit rather than going through generic symbolic algebra).
QuasiPolynomial triad_quasi(const InteractionMatrix& m, const DelayPlacement& pl) {
    const double a11 = m.a11, a12 = m.a12, a21 = m.a21, a22 = m.a22;
    const double a23 = m.a23, a32 = m.a32, a33 = m.a33;
    QuasiPolynomial w;
    w.tag = pl.kind;
    w.dim = 3;
    // (lambda - a11)(lambda - a33) expanded
    const double s = a11 + a33, p0 = a11 * a33;
    if (pl.kind == Placement::TriadJIn) {
        // W = (l-a11)(l-a22)(l-a33) - e^{-l tau}[a12 a21 (l-a33) + a23 a32 (l-a11)]
        w.p = Poly{{-p0 * a22, p0 + a22 * s, -(s + a22), 1.0}};
        w.q1 = Poly{{a12 * a21 * a33 + a23 * a32 * a11, -(a12 * a21 + a23 * a32)}};
    } else if (pl.kind == Placement::TriadJOwn) {
        // W = l(l-a11)(l-a33) - a23 a32 (l-a11) - a12 a21 (l-a33)
        //     - a22 e^{-l tau} (l-a11)(l-a33)
        w.p = Poly{{a23 * a32 * a11 + a12 * a21 * a33, p0 - a23 * a32 - a12 * a21, -s, 1.0}};
        w.q1 = Poly{{-a22 * p0, a22 * s, -a22}};
    } else {
        throw ConfigError("unsupported triad placement");
    }
    return w;
}

} // namespace

double QuasiPolynomial::right_half_plane_root_bound() const {
    // On Re(lambda) >= 0, |e^{-lambda tau}| <= 1, so any root satisfies
    // |lambda|^n <= sum_k (|p_k|+|q1_k|+|q2_k|) |lambda|^k. Fujiwara's bound
    // applied to that majorant: |lambda| <= 2 max_k cbar_{n-k}^{1/k}.
    const int n = p.degree();
    double bound = 1.0;
    for (int k = 1; k <= n; ++k) {
        const size_t deg = static_cast<size_t>(n - k);
        const double cbar = std::abs(p.coeff(deg)) + std::abs(q1.coeff(deg)) +
                            std::abs(q2.coeff(deg));
        bound = std::max(bound, 2.0 * std::pow(cbar, 1.0 / static_cast<double>(k)));
    }
    return bound;
}

bool has_single_exponential(const QuasiPolynomial& w) {
    return w.q1.is_zero() || w.q2.is_zero();
}

SingleExpForm single_exp_form(const QuasiPolynomial& w) {
    if (!has_single_exponential(w))
        throw NonGenericError(
            "quasi-polynomial has two irreducible exponential terms; use the trigonometric scan "
            "or the spectral counter");
    SingleExpForm f;
    f.p = w.p;
    if (!w.q2.is_zero()) {
        f.q = w.q2;
        f.exp_multiplier = 2;
    } else {
        f.q = w.q1;
        f.exp_multiplier = 1;
    }
    return f;
}

QuasiPolynomial quasi_polynomial(const DelaySystem& sys) {
    if (sys.placement.is_triad()) return triad_quasi(sys.matrix, sys.placement);
    return planar_quasi(sys.matrix, sys.placement);
}

std::complex<double> evaluate(const QuasiPolynomial& w, std::complex<double> lambda, double tau) {
    const std::complex<double> e1 = std::exp(-lambda * tau);
    return w.p.eval(lambda) + w.q1.eval(lambda) * e1 + w.q2.eval(lambda) * (e1 * e1);
}

std::complex<double> evaluate_derivative(const QuasiPolynomial& w, std::complex<double> lambda,
                                         double tau) {
    const std::complex<double> e1 = std::exp(-lambda * tau);
    return w.p.derivative().eval(lambda) +
           (w.q1.derivative().eval(lambda) - tau * w.q1.eval(lambda)) * e1 +
           (w.q2.derivative().eval(lambda) - 2.0 * tau * w.q2.eval(lambda)) * (e1 * e1);
}

Poly tau_zero_polynomial(const QuasiPolynomial& w) {
    return w.p + w.q1 + w.q2;
}

} // namespace delstab
