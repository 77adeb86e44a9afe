#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace delstab {

/// Dense real polynomial, ascending coefficients: c[0] + c[1]*x + ...
/// Degrees here never exceed 3, so a dense vector is the right storage.
struct Poly {
    std::vector<double> c;

    Poly() = default;
    explicit Poly(std::vector<double> coeffs) : c(std::move(coeffs)) { trim(); }

    static Poly zero() { return Poly{}; }

    bool is_zero() const {
        for (double v : c)
            if (v != 0.0) return false;
        return true;
    }

    int degree() const {
        for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
            if (c[static_cast<size_t>(i)] != 0.0) return i;
        return -1;
    }

    double coeff(size_t k) const { return k < c.size() ? c[k] : 0.0; }

    void trim() {
        while (!c.empty() && c.back() == 0.0) c.pop_back();
    }

    std::complex<double> eval(std::complex<double> x) const {
        std::complex<double> r{0.0, 0.0};
        for (size_t i = c.size(); i-- > 0;) r = r * x + c[i];
        return r;
    }

    double eval(double x) const {
        double r = 0.0;
        for (size_t i = c.size(); i-- > 0;) r = r * x + c[i];
        return r;
    }

    Poly derivative() const {
        if (c.size() <= 1) return Poly{};
        std::vector<double> d(c.size() - 1);
        for (size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<double>(i);
        return Poly{std::move(d)};
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        std::vector<double> s(std::max(a.c.size(), b.c.size()), 0.0);
        for (size_t i = 0; i < s.size(); ++i) s[i] = a.coeff(i) + b.coeff(i);
        return Poly{std::move(s)};
    }

    double abs_coeff_sum() const {
        double s = 0.0;
        for (double v : c) s += std::abs(v);
        return s;
    }
};

} // namespace delstab
