#pragma once

// Linear differential operators sum_m a_m(r) (d/dr)^m with SymExpr
// coefficients, plus "jets" (value and derivatives at a point) of radial
// functions that the operators can be applied to numerically.

#include "oddhyp/core/errors.hpp"
#include "oddhyp/core/scalar.hpp"
#include "oddhyp/trigexpr.hpp"

#include <functional>
#include <vector>

namespace oddhyp {

/// jet(r, m) returns {f(r), f'(r), ..., f^{(m)}(r)}.
using JetFunction = std::function<std::vector<Complex>(Complex, int)>;

class DiffOp {
public:
    explicit DiffOp(Flavor flavor = Flavor::circular) : flavor_(flavor) {}

    static DiffOp identity(Flavor f) { return multiply(SymExpr::constant(1, f)); }

    /// Multiplication by e.
    static DiffOp multiply(const SymExpr& e) {
        DiffOp op(e.flavor());
        op.coeffs_.push_back(e);
        return op;
    }

    /// (d/dr)^m.
    static DiffOp derivative(int m, Flavor f) {
        DiffOp op(f);
        op.coeffs_.assign(m + 1, SymExpr(f));
        op.coeffs_[m] = SymExpr::constant(1, f);
        return op;
    }

    Flavor flavor() const { return flavor_; }
    int order() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<SymExpr>& coeffs() const { return coeffs_; }

    friend DiffOp operator+(const DiffOp& a, const DiffOp& b) {
        if (a.flavor_ != b.flavor_) throw FlavorMismatch("DiffOp: flavor mismatch");
        DiffOp out(a.flavor_);
        const std::size_t n = std::max(a.coeffs_.size(), b.coeffs_.size());
        out.coeffs_.assign(n, SymExpr(a.flavor_));
        for (std::size_t m = 0; m < a.coeffs_.size(); ++m) out.coeffs_[m] = out.coeffs_[m] + a.coeffs_[m];
        for (std::size_t m = 0; m < b.coeffs_.size(); ++m) out.coeffs_[m] = out.coeffs_[m] + b.coeffs_[m];
        out.trim();
        return out;
    }
    friend DiffOp operator-(const DiffOp& a, const DiffOp& b) { return a + b * Scalar(-1); }

    friend DiffOp operator*(const DiffOp& a, const Scalar& s) {
        DiffOp out = a;
        for (auto& c : out.coeffs_) c = c * s;
        out.trim();
        return out;
    }

    /// Composition (a * b) f = a(b(f)).
    friend DiffOp operator*(const DiffOp& a, const DiffOp& b) {
        if (a.flavor_ != b.flavor_) throw FlavorMismatch("DiffOp: flavor mismatch");
        DiffOp out(a.flavor_);
        if (a.coeffs_.empty() || b.coeffs_.empty()) return out;
        out.coeffs_.assign(a.coeffs_.size() + b.coeffs_.size() - 1, SymExpr(a.flavor_));
        // d^i (b_j f^{(j)}) = sum_l binom(i, l) b_j^{(l)} f^{(j + i - l)}
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
            std::vector<SymExpr> bder{b.coeffs_[j]};
            for (std::size_t l = 1; l < a.coeffs_.size(); ++l) bder.push_back(bder.back().differentiate());
            for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
                if (a.coeffs_[i].is_zero()) continue;
                for (std::size_t l = 0; l <= i; ++l) {
                    if (bder[l].is_zero()) continue;
                    out.coeffs_[j + i - l] =
                        out.coeffs_[j + i - l] + a.coeffs_[i] * bder[l] * binomial(static_cast<int>(i), static_cast<int>(l));
                }
            }
        }
        out.trim();
        return out;
    }

    DiffOp pow(int k) const {
        DiffOp out = identity(flavor_);
        for (int i = 0; i < k; ++i) out = *this * out;
        return out;
    }

    /// Symbolic application.
    SymExpr apply(const SymExpr& f) const {
        SymExpr out(flavor_);
        SymExpr der = f;
        for (std::size_t m = 0; m < coeffs_.size(); ++m) {
            if (m > 0) der = der.differentiate();
            if (!coeffs_[m].is_zero()) out = out + coeffs_[m] * der;
        }
        return out;
    }

    /// Numerical application to a jet.
    Complex apply(const JetFunction& jet, Complex r, const EvalOptions& opt = {}) const {
        const auto d = jet(r, order());
        if (static_cast<int>(d.size()) < order() + 1)
            throw DifferentiationFailure("DiffOp::apply: jet supplied too few derivatives");
        Complex acc(0.0, 0.0);
        for (std::size_t m = 0; m < coeffs_.size(); ++m) {
            if (coeffs_[m].is_zero()) continue;
            if (!std::isfinite(d[m].real()) || !std::isfinite(d[m].imag()))
                throw DifferentiationFailure("DiffOp::apply: non-finite derivative");
            acc += coeffs_[m].evaluate(r, opt) * d[m];
        }
        return acc;
    }

    /// True when every coefficient vanishes to `rel` relative to the largest coefficient of `scale_ops`.
    bool near_zero(const Scalar& rel, const Scalar& scale) const {
        for (const auto& c : coeffs_)
            if (!c.near_zero(rel, scale)) return false;
        return true;
    }

    Scalar max_abs_coeff() const {
        Scalar m = 0;
        for (const auto& c : coeffs_) m = std::max(m, c.max_abs_coeff());
        return m;
    }

private:
    void trim() {
        while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
    }

    Flavor flavor_;
    std::vector<SymExpr> coeffs_;
};

namespace ops {

/// L = -(1/2pi) S(r)^{-1} d/dr.
inline DiffOp L(Flavor f) { return DiffOp::multiply(SymExpr::sin_pow(-1, f) * (Scalar(-1) / two_pi_scalar())) * DiffOp::derivative(1, f); }

/// D* (hyperbolic) or D~* (circular): L^n.
inline DiffOp shift_star(int n, Flavor f) { return L(f).pow(n); }

/// T_k = (1/(2k+1)) (S d/dr + (2k+1) C).
inline DiffOp T(int k, Flavor f) {
    const Scalar w = 2 * k + 1;
    DiffOp op = DiffOp::multiply(SymExpr::sin_pow(1, f)) * DiffOp::derivative(1, f) +
                DiffOp::multiply(SymExpr::cos_pow(1, f) * w);
    return op * (Scalar(1) / w);
}

/// D (hyperbolic) or D~ (circular): (1/(2n-1)!!) prod_{k=1}^n (S d + (2k-1) C), smaller k on the left.
inline DiffOp shift(int n, Flavor f) {
    DiffOp out = DiffOp::identity(f);
    for (int k = n - 1; k >= 0; --k) out = T(k, f) * out;
    return out;
}

/// d^2/dr^2 + 2n (C/S) d/dr.
inline DiffOp radial_laplacian(int n, Flavor f) {
    return DiffOp::derivative(2, f) +
           DiffOp::multiply(SymExpr::monomial(2 * n, 0, 0, -1, 1, f)) * DiffOp::derivative(1, f);
}

/// d^2/dr^2 + shift (shift = n^2 on the sphere side, -n^2 on the hyperbolic side).
inline DiffOp euclid_laplacian(const Scalar& shift, Flavor f) {
    return DiffOp::derivative(2, f) + DiffOp::multiply(SymExpr::constant(shift, f));
}

}  // namespace ops

namespace jets {

/// Jet of a symbolic expression; derivatives are precomputed up to max_order.
inline JetFunction from_expr(const SymExpr& e, int max_order, EvalOptions opt = {}) {
    std::vector<SymExpr> ders{e};
    for (int m = 1; m <= max_order; ++m) ders.push_back(ders.back().differentiate());
    return [ders, max_order, opt](Complex r, int m) {
        if (m > max_order) throw DifferentiationFailure("expression jet: order above precomputed maximum");
        std::vector<Complex> out(m + 1);
        for (int k = 0; k <= m; ++k) out[k] = ders[k].evaluate(r, opt);
        return out;
    };
}

/// cosh(lambda r) (hyperbolic = true) or cos(lambda r).
inline JetFunction cosh_lambda(double lambda, bool hyperbolic = true) {
    return [lambda, hyperbolic](Complex r, int m) {
        std::vector<Complex> out(m + 1);
        const Complex z = lambda * r;
        const Complex ev = hyperbolic ? std::cosh(z) : std::cos(z);
        const Complex od = hyperbolic ? std::sinh(z) : -std::sin(z);
        double lp = 1.0;
        for (int k = 0; k <= m; ++k) {
            if (hyperbolic) {
                out[k] = lp * (k % 2 == 0 ? ev : od);
            } else {
                // cos^{(k)} cycles cos, -sin, -cos, sin
                const int phase = k % 4;
                out[k] = lp * (phase == 0 ? ev : phase == 1 ? od : phase == 2 ? -ev : -od);
            }
            lp *= lambda;
        }
        return out;
    };
}

/// Derivatives of a holomorphic callable from the Cauchy integral on a circle
/// of the given radius (trapezoid rule, exponentially convergent).
inline JetFunction cauchy(std::function<Complex(Complex)> f, double radius = 0.25, int samples = 64) {
    return [f = std::move(f), radius, samples](Complex r, int m) {
        std::vector<Complex> vals(samples);
        for (int j = 0; j < samples; ++j) {
            const double th = kTwoPi * j / samples;
            vals[j] = f(r + radius * Complex(std::cos(th), std::sin(th)));
        }
        std::vector<Complex> out(m + 1);
        double fact = 1.0;
        for (int k = 0; k <= m; ++k) {
            if (k > 0) fact *= k;
            Complex acc(0.0, 0.0);
            for (int j = 0; j < samples; ++j) {
                const double th = kTwoPi * j / samples;
                acc += vals[j] * Complex(std::cos(k * th), -std::sin(k * th));
            }
            out[k] = acc / static_cast<double>(samples) * fact / std::pow(radius, k);
        }
        out[0] = f(r);
        return out;
    };
}

}  // namespace jets

/// First derivative of a real-analytic callable by the complex step x + i h.
template <class F>
double complex_step_derivative(F&& f, double x, double h = 1e-20) {
    const Complex v = f(Complex(x, h));
    if (!std::isfinite(v.imag())) throw DifferentiationFailure("complex step: non-finite value");
    return v.imag() / h;
}

}  // namespace oddhyp
