#pragma once

#include <complex>

#include "delstab/model.hpp"
#include "delstab/poly.hpp"

namespace delstab {

/// Characteristic quasi-polynomial
///   W(lambda; tau) = p(lambda) + q1(lambda) e^{-lambda tau} + q2(lambda) e^{-2 lambda tau}
/// with p monic of degree equal to the system dimension.
struct QuasiPolynomial {
    Poly p;
    Poly q1;
    Poly q2;
    Placement tag = Placement::None;
    int dim = 2;

    /// Upper bound on |lambda| for any root with Re(lambda) >= 0, valid for
    /// every tau >= 0 (uses |e^{-lambda tau}| <= 1 on that half-plane).
    double right_half_plane_root_bound() const;
};

/// Reduced form W = p + q e^{-k lambda tau} for placements with a single
/// exponential. k = 1 when q1 carries the delay, k = 2 when only q2 does.
struct SingleExpForm {
    Poly p;
    Poly q;
    int exp_multiplier = 1;
};

/// True when at most one of q1, q2 is nonzero (the classical one-exponential
/// analysis applies, possibly with a doubled phase rate).
bool has_single_exponential(const QuasiPolynomial& w);

/// Extracts the reduced form; throws NonGenericError when both exponentials
/// are present (irreducible trigonometric case).
SingleExpForm single_exp_form(const QuasiPolynomial& w);

QuasiPolynomial quasi_polynomial(const DelaySystem& sys);

std::complex<double> evaluate(const QuasiPolynomial& w, std::complex<double> lambda, double tau);

/// d/dlambda of W at fixed tau.
std::complex<double> evaluate_derivative(const QuasiPolynomial& w, std::complex<double> lambda,
                                         double tau);

/// W at tau = 0 collapsed to an ordinary polynomial (p + q1 + q2); equals the
/// characteristic polynomial of the zero-delay system.
Poly tau_zero_polynomial(const QuasiPolynomial& w);

} // namespace delstab
