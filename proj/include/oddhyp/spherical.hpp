#pragma once

// Spherical functions of H^{2k+1} and their continuation Phi_k(r) = phi_{lambda,k}(i r).
//
// Phi_0(r) = cosh(lambda r) and (1/sin r) d/dr Phi_k = d(lambda,k) Phi_{k+1}. Every
// Phi_k is a finite sum of terms
//
//     a * S^{(l)}(lambda r) * r^p * sin^q r * cos^c r,     S(x) = sinh(x)/x,
//
// which is the representation held by SphericalExpr. The ladder starts from
// Phi_1 = r S(lambda r)/sin r so that lambda = 0 needs no special casing.

#include "oddhyp/core/errors.hpp"
#include "oddhyp/core/quadrature.hpp"
#include "oddhyp/core/scalar.hpp"
#include "oddhyp/core/series.hpp"
#include "oddhyp/diffop.hpp"
#include "oddhyp/trigexpr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

namespace oddhyp {

/// S^{(l)}(z) for l = 0..lmax, where S^{(l)}(z) = (1/2) int_{-1}^{1} u^l e^{zu} du.
inline std::vector<Complex> sinhc_derivatives(Complex z, int lmax) {
    std::vector<Complex> out(lmax + 1);
    const double az = std::abs(z);
    if (az <= 2.0) {
        for (int l = 0; l <= lmax; ++l) {
            Complex acc(0.0, 0.0), zk(1.0, 0.0);
            double fact = 1.0;
            for (int k = 0; k < 60; ++k) {
                if (k > 0) {
                    zk *= z;
                    fact *= k;
                }
                if ((l + k) % 2 == 0) {
                    const Complex term = zk / (fact * (l + k + 1));
                    acc += term;
                    if (k > 8 && std::abs(term) < 1e-18 * std::abs(acc)) break;
                }
            }
            out[l] = acc;
        }
        return out;
    }
    if (az >= std::max(2.0, lmax + 1.0)) {
        const Complex ep = std::exp(z), em = std::exp(-z);
        out[0] = (ep - em) / (2.0 * z);
        for (int l = 1; l <= lmax; ++l) {
            const Complex boundary = (ep - (l % 2 == 0 ? em : -em)) / (2.0 * z);
            out[l] = boundary - (static_cast<double>(l) / z) * out[l - 1];
        }
        return out;
    }
    static const QuadratureRule rule = QuadratureRule::gauss_legendre(48, -1.0, 1.0);
    for (int l = 0; l <= lmax; ++l) out[l] = Complex(0.0, 0.0);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double u = rule.nodes[i];
        const Complex e = 0.5 * rule.weights[i] * std::exp(z * u);
        double up = 1.0;
        for (int l = 0; l <= lmax; ++l) {
            out[l] += up * e;
            up *= u;
        }
    }
    return out;
}

inline double ladder_d(double lambda, int k) { return (lambda * lambda + double(k) * k) / (2.0 * k + 1.0); }

inline Scalar ladder_d_scalar(const Scalar& lambda, int k) { return (lambda * lambda + k * k) / Scalar(2 * k + 1); }

/// c(lambda, n) = prod_{k<n} d(lambda, k) / (-2 pi)^n.
inline double ladder_c(double lambda, int n) {
    Scalar out = 1;
    for (int k = 0; k < n; ++k) out *= ladder_d_scalar(Scalar(lambda), k) / (-two_pi_scalar());
    return to_double(out);
}

struct SphTerm {
    Scalar coeff = 0;
    int l = 0;  // order of the S-derivative
    int p = 0;  // power of r
    int q = 0;  // power of sin r
    int c = 0;  // power of cos r (0 or 1 once canonical)
};

class SphericalExpr {
public:
    explicit SphericalExpr(double lambda = 0.0) : lambda_(lambda), lambda_s_(lambda) {}
    SphericalExpr(double lambda, std::vector<SphTerm> terms)
        : lambda_(lambda), lambda_s_(lambda), terms_(std::move(terms)) {
        canonicalize();
    }

    /// cosh(lambda r) = S(lambda r) + lambda r S'(lambda r).
    static SphericalExpr cosh_lambda(double lambda) {
        return SphericalExpr(lambda, {SphTerm{1, 0, 0, 0, 0}, SphTerm{Scalar(lambda), 1, 1, 0, 0}});
    }

    double lambda() const { return lambda_; }
    const std::vector<SphTerm>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int max_l() const {
        int m = 0;
        for (const auto& t : terms_) m = std::max(m, t.l);
        return m;
    }

    friend SphericalExpr operator+(const SphericalExpr& a, const SphericalExpr& b) {
        std::vector<SphTerm> terms = a.terms_;
        terms.insert(terms.end(), b.terms_.begin(), b.terms_.end());
        return SphericalExpr(a.lambda_, std::move(terms));
    }
    friend SphericalExpr operator-(const SphericalExpr& a, const SphericalExpr& b) { return a + b * Scalar(-1); }
    friend SphericalExpr operator*(const SphericalExpr& a, const Scalar& s) {
        std::vector<SphTerm> terms = a.terms_;
        for (auto& t : terms) t.coeff *= s;
        return SphericalExpr(a.lambda_, std::move(terms));
    }

    SphericalExpr times_sin_pow(int k) const {
        std::vector<SphTerm> terms = terms_;
        for (auto& t : terms) t.q += k;
        return SphericalExpr(lambda_, std::move(terms));
    }

    SphericalExpr differentiate() const {
        std::vector<SphTerm> out;
        out.reserve(4 * terms_.size());
        for (const auto& t : terms_) {
            if (lambda_s_ != 0) out.push_back({t.coeff * lambda_s_, t.l + 1, t.p, t.q, t.c});
            if (t.p) out.push_back({t.coeff * t.p, t.l, t.p - 1, t.q, t.c});
            if (t.q) out.push_back({t.coeff * t.q, t.l, t.p, t.q - 1, t.c + 1});
            if (t.c) out.push_back({-t.coeff * t.c, t.l, t.p, t.q + 1, t.c - 1});
        }
        return SphericalExpr(lambda_, std::move(out));
    }

    /// -(1/2pi) (1/sin r) d/dr.
    SphericalExpr apply_L() const { return differentiate().times_sin_pow(-1) * (Scalar(-1) / two_pi_scalar()); }

    /// T_k = (1/(2k+1)) (sin r d/dr + (2k+1) cos r).
    SphericalExpr apply_T(int k) const {
        const Scalar w = 2 * k + 1;
        std::vector<SphTerm> out = differentiate().times_sin_pow(1).terms_;
        for (const auto& t : terms_) out.push_back({t.coeff * w, t.l, t.p, t.q, t.c + 1});
        return SphericalExpr(lambda_, std::move(out)) * (Scalar(1) / w);
    }

    /// D~ = T_0 T_1 ... T_{n-1}.
    SphericalExpr apply_Dtilde(int n) const {
        SphericalExpr e = *this;
        for (int k = n - 1; k >= 0; --k) e = e.apply_T(k);
        return e;
    }

    /// Symbolic zero up to a coefficient tolerance relative to `scale`.
    bool near_zero(const Scalar& rel, const Scalar& scale) const {
        for (const auto& t : terms_)
            if (boost::multiprecision::abs(t.coeff) > rel * scale) return false;
        return true;
    }

    Complex evaluate(Complex r, const EvalOptions& opt = {}) const {
        if (terms_.empty()) return Complex(0.0, 0.0);
        bool negative = false;
        for (const auto& t : terms_) negative = negative || t.q < 0;
        if (negative) {
            const long m = std::lround(r.real() / kPi);
            const double dist = std::abs(r - Complex(m * kPi, 0.0));
            const double radius = lambda_ > 0 ? std::min(opt.series_radius, 2.0 / std::abs(lambda_)) : opt.series_radius;
            if (m == 0 && std::abs(r) < radius) {
                const auto& ser = series(opt);
                if (ser.regular) return ser.taylor.evaluate(r);
            }
            if (dist < opt.pole_guard) throw PoleError("SphericalExpr::evaluate: r within pole guard of m*pi");
        }
        return evaluate_direct(r);
    }

    Complex evaluate_direct(Complex r) const {
        const auto sd = sinhc_derivatives(lambda_ * r, max_l());
        const Complex s = std::sin(r), c = std::cos(r);
        Complex acc(0.0, 0.0);
        for (const auto& t : compiled()) {
            Complex v = t.coeff * sd[t.l];
            if (t.p) v *= ipow(r, t.p);
            if (t.q) v *= ipow(s, t.q);
            if (t.c) v *= c;
            acc += v;
        }
        return acc;
    }

    LaurentSeries laurent_at_zero(int order) const {
        LaurentSeries out;
        int offset = 0;
        for (const auto& t : terms_) offset = std::min(offset, t.p + t.q);
        out.offset = offset;
        const std::size_t len = static_cast<std::size_t>(order - offset);
        out.coeffs = PowerSeries(len);
        out.magnitude.assign(len + 1, Scalar(0));
        const PowerSeries sinc = series::sinc(len, false);
        const PowerSeries cosine = series::cosine(len, false);
        std::map<int, PowerSeries> sinc_pows, sh;
        for (const auto& t : terms_) {
            auto it = sinc_pows.find(t.q);
            if (it == sinc_pows.end()) it = sinc_pows.emplace(t.q, sinc.pow(t.q)).first;
            auto jt = sh.find(t.l);
            if (jt == sh.end()) jt = sh.emplace(t.l, s_series(t.l, len)).first;
            PowerSeries term = it->second * jt->second;
            if (t.c) term = term * cosine.pow(t.c);
            const int shift = t.p + t.q - offset;
            for (std::size_t k = 0; k + shift <= len; ++k) {
                const Scalar v = t.coeff * term[k];
                out.coeffs[k + shift] += v;
                out.magnitude[k + shift] += boost::multiprecision::abs(v);
            }
        }
        return out;
    }

private:
    struct Compiled {
        double coeff;
        int l, p, q, c;
    };
    struct SeriesData {
        bool regular = false;
        PowerSeries taylor;
    };
    struct Lazy {
        std::once_flag compiled_once, series_once;
        std::vector<Compiled> compiled;
        SeriesData series;
    };

    /// Taylor series of S^{(l)}(lambda r) in r.
    PowerSeries s_series(int l, std::size_t len) const {
        PowerSeries s(len);
        Scalar lp = 1, fact = 1;
        for (std::size_t k = 0; k <= len; ++k) {
            if (k > 0) {
                lp *= lambda_s_;
                fact *= static_cast<unsigned>(k);
            }
            if ((l + k) % 2 == 0) s[k] = lp / (fact * (l + static_cast<int>(k) + 1));
        }
        return s;
    }

    void canonicalize() {
        std::map<std::tuple<int, int, int, int>, Scalar> acc;
        for (const auto& t : terms_) {
            const int half = t.c / 2;
            for (int i = 0; i <= half; ++i) {
                Scalar coeff = t.coeff * binomial(half, i);
                if (i % 2 == 1) coeff = -coeff;
                acc[{t.l, t.p, t.q + 2 * i, t.c % 2}] += coeff;
            }
        }
        terms_.clear();
        for (const auto& [k, v] : acc)
            if (v != 0) terms_.push_back({v, std::get<0>(k), std::get<1>(k), std::get<2>(k), std::get<3>(k)});
        lazy_ = std::make_shared<Lazy>();
    }

    const std::vector<Compiled>& compiled() const {
        std::call_once(lazy_->compiled_once, [this] {
            for (const auto& t : terms_) lazy_->compiled.push_back({to_double(t.coeff), t.l, t.p, t.q, t.c});
        });
        return lazy_->compiled;
    }

    const SeriesData& series(const EvalOptions& opt) const {
        std::call_once(lazy_->series_once, [&] {
            const auto laurent = laurent_at_zero(opt.series_order);
            lazy_->series.regular = laurent.regular();
            if (lazy_->series.regular) lazy_->series.taylor = laurent.taylor();
        });
        return lazy_->series;
    }

    double lambda_;
    Scalar lambda_s_;
    std::vector<SphTerm> terms_;
    std::shared_ptr<Lazy> lazy_ = std::make_shared<Lazy>();
};

/// One step of the ladder: (1/d(lambda,k)) (1/sin r) d/dr.
inline SphericalExpr ladder_step(const SphericalExpr& phi_k, int k) {
    const Scalar d = ladder_d_scalar(Scalar(phi_k.lambda()), k);
    if (d == 0) throw DegenerateLambda("ladder step with d(lambda, k) = 0 (lambda = 0, k = 0)");
    return phi_k.differentiate().times_sin_pow(-1) * (Scalar(1) / d);
}

/// Phi_k(r) = phi_{lambda,k}(i r) as a symbolic expression.
inline SphericalExpr spherical_phi_expr(double lambda, int k) {
    if (k < 0) throw Error("spherical_phi_expr: k must be nonnegative");
    if (k == 0) return SphericalExpr::cosh_lambda(lambda);
    SphericalExpr phi(lambda, {SphTerm{1, 0, 1, -1, 0}});
    for (int j = 1; j < k; ++j) phi = ladder_step(phi, j);
    return phi;
}

/// Evaluator for phi_{lambda,k} on the imaginary axis (phi_i) and the real axis
/// (phi_real), with symbolic derivatives up to a fixed order.
class SphericalEval {
public:
    SphericalEval(double lambda, int k, int max_derivative = 2, EvalOptions opt = {})
        : lambda_(lambda), k_(k), opt_(opt) {
        ders_.push_back(spherical_phi_expr(lambda, k));
        for (int m = 1; m <= max_derivative; ++m) ders_.push_back(ders_.back().differentiate());
    }

    double lambda() const { return lambda_; }
    int k() const { return k_; }
    int max_derivative() const { return static_cast<int>(ders_.size()) - 1; }
    const SphericalExpr& expr(int m = 0) const { return ders_.at(m); }

    Complex phi_i(Complex r) const { return ders_[0].evaluate(r, opt_); }

    Complex phi_i_derivative(Complex r, int m) const {
        if (m > max_derivative()) throw DifferentiationFailure("SphericalEval: derivative order not prepared");
        return ders_[m].evaluate(r, opt_);
    }

    /// phi_{lambda,k}(x) = Phi_k(i x); x may be complex.
    Complex phi_real(Complex x) const { return phi_i(Complex(0.0, 1.0) * x); }
    double phi_real(double x) const { return phi_real(Complex(x, 0.0)).real(); }

    /// d^m/dx^m phi(x) = i^m Phi^{(m)}(i x).
    Complex phi_real_derivative(Complex x, int m) const {
        return ipow(Complex(0.0, 1.0), m) * phi_i_derivative(Complex(0.0, 1.0) * x, m);
    }

    JetFunction jet_i() const {
        return [this](Complex r, int m) {
            std::vector<Complex> out(m + 1);
            for (int j = 0; j <= m; ++j) out[j] = phi_i_derivative(r, j);
            return out;
        };
    }

    JetFunction jet_real() const {
        return [this](Complex x, int m) {
            std::vector<Complex> out(m + 1);
            for (int j = 0; j <= m; ++j) out[j] = phi_real_derivative(x, j);
            return out;
        };
    }

private:
    double lambda_;
    int k_;
    EvalOptions opt_;
    std::vector<SphericalExpr> ders_;
};

inline Complex phi_i(double lambda, int k, Complex r) { return spherical_phi_expr(lambda, k).evaluate(r); }

inline double phi_real(double lambda, int k, double r) {
    return spherical_phi_expr(lambda, k).evaluate(Complex(0.0, r)).real();
}

/// D~ applied symbolically to Phi_n, evaluated at r; equals cosh(lambda r).
inline Complex apply_Dtilde_to_phi(double lambda, int n, Complex r) {
    return spherical_phi_expr(lambda, n).apply_Dtilde(n).evaluate(r);
}

/// D~* = L^n applied symbolically to cosh(lambda r); equals c(lambda,n) Phi_n(r).
inline Complex apply_Dtilde_star_to_cosh(double lambda, int n, Complex r) {
    SphericalExpr e = SphericalExpr::cosh_lambda(lambda);
    for (int i = 0; i < n; ++i) e = e.apply_L();
    return e.evaluate(r);
}

// ---- estimates ----------------------------------------------------------------

/// (e^x - 1)/x with the limit 1 at x = 0.
inline double expm1_over_x(double x) { return x == 0.0 ? 1.0 : std::expm1(x) / x; }

/// Right side of the derivative estimate for Phi_n: C (1+|r|)/(1+lambda)^{n-l-1} (e^{|lambda r|}-1)/|lambda r|.
inline double estimate_rhs(double lambda, Complex r, int l, int n, double constant) {
    const double lam = std::abs(lambda);
    return constant * (1.0 + std::abs(r)) / std::pow(1.0 + lam, n - l - 1) * expm1_over_x(lam * std::abs(r));
}

/// Large-lambda form D e^{|lambda r|}/|lambda|^{n-l}.
inline double estimate_rhs_big(double lambda, Complex r, int l, int n, double constant) {
    const double lam = std::abs(lambda);
    return constant * std::exp(lam * std::abs(r)) / std::pow(lam, n - l);
}

/// Small-lambda form E (1+|r|) |e^{r}|.
inline double estimate_rhs_small(Complex r, double constant) {
    return constant * (1.0 + std::abs(r)) * std::exp(r.real());
}

/// Sample points of S_{eps,A} with re_min <= Re r <= re_max: a rectangular
/// grid plus points on the circles of radius 1.001 eps around each m pi. The
/// grid for density 2d-1 contains the grid for density d.
inline std::vector<Complex> region_sample(double eps, double A, double re_min, double re_max, int density) {
    std::vector<Complex> pts;
    const int base = std::max(1, density - 1);
    const int nx = static_cast<int>(std::ceil(re_max - re_min)) * base;
    const int ny = 2 * base;
    for (int i = 0; i <= nx; ++i) {
        const double x = re_min + (re_max - re_min) * i / nx;
        for (int j = 0; j <= ny; ++j) {
            const double y = -A * 0.999 + 2 * A * 0.999 * j / ny;
            const Complex z(x, y);
            bool ok = true;
            for (long m = 1; m * kPi < re_max + eps; ++m)
                if (std::abs(z - Complex(m * kPi, 0.0)) <= eps * 1.001) ok = false;
            if (ok) pts.push_back(z);
        }
    }
    const int na = 8 * base;
    for (long m = 1; m * kPi < re_max; ++m) {
        for (int j = 0; j < na; ++j) {
            const double th = kTwoPi * j / na;
            const Complex z = Complex(m * kPi, 0.0) + 1.001 * eps * Complex(std::cos(th), std::sin(th));
            if (std::abs(z.imag()) < A) pts.push_back(z);
        }
    }
    return pts;
}

/// Fitted constants per derivative order l on a coarse and a refined grid.
struct EstimateFit {
    std::vector<double> constant_coarse;
    std::vector<double> constant_fine;
    bool finite = false;
    bool stable = false;

    double max_ratio() const {
        double m = 0.0;
        for (std::size_t l = 0; l < constant_coarse.size(); ++l)
            if (constant_coarse[l] > 0) m = std::max(m, constant_fine[l] / constant_coarse[l]);
        return m;
    }
};

struct EstimateGrid {
    double eps = 0.3;
    double A = 1.0;
    double re_max = 4 * kPi;
    double lambda_max = 10.0;
    int lambda_count = 10;
    int l_count = 10;
    int density = 3;  // coarse r grid; refined as 2 density - 1
    double stable_ratio = 1.25;
};

namespace detail {

template <class Bound>
std::vector<double> fit_phi_constants(int n, const EstimateGrid& g, int lambda_count, int density, double lambda_min,
                                      Bound&& bound) {
    const auto pts = region_sample(g.eps, g.A, 0.05, g.re_max, density);
    std::vector<double> best(g.l_count, 0.0);
    for (int a = 0; a < lambda_count; ++a) {
        const double lambda =
            lambda_count == 1 ? lambda_min : lambda_min + (g.lambda_max - lambda_min) * a / (lambda_count - 1);
        SphericalEval ev(lambda, n, g.l_count - 1);
        for (const auto& r : pts) {
            for (int l = 0; l < g.l_count; ++l) {
                const double rhs = bound(lambda, r, l);
                if (rhs > 0) best[l] = std::max(best[l], std::abs(ev.phi_i_derivative(r, l)) / rhs);
            }
        }
    }
    return best;
}

template <class Bound>
EstimateFit fit_constants(int n, const EstimateGrid& g, double lambda_min, Bound&& bound) {
    EstimateFit fit;
    fit.constant_coarse = fit_phi_constants(n, g, g.lambda_count, g.density, lambda_min, bound);
    fit.constant_fine = fit_phi_constants(n, g, 2 * g.lambda_count - 1, 2 * g.density - 1, lambda_min, bound);
    fit.finite = true;
    for (std::size_t l = 0; l < fit.constant_coarse.size(); ++l)
        fit.finite = fit.finite && std::isfinite(fit.constant_coarse[l]) && std::isfinite(fit.constant_fine[l]);
    fit.stable = fit.finite && fit.max_ratio() <= g.stable_ratio;
    return fit;
}

}  // namespace detail

/// Fit C_{n,l} in |Phi_n^{(l)}(r)| <= C (1+|r|)/(1+lambda)^{n-l-1} (e^{|lambda r|}-1)/|lambda r|.
inline EstimateFit fit_phi_estimate(int n, const EstimateGrid& g = {}) {
    return detail::fit_constants(n, g, 0.0, [n](double lambda, Complex r, int l) {
        return estimate_rhs(lambda, r, l, n, 1.0);
    });
}

/// Large-lambda form (lambda > 1, |r| > 1).
inline EstimateFit fit_phi_estimate_big(int n, const EstimateGrid& g = {}) {
    return detail::fit_constants(n, g, 1.5, [n](double lambda, Complex r, int l) {
        return std::abs(r) > 1.0 ? estimate_rhs_big(lambda, r, l, n, 1.0) : 0.0;
    });
}

/// Small-lambda form (lambda <= 1).
inline EstimateFit fit_phi_estimate_small(int n, EstimateGrid g = {}) {
    g.lambda_max = 1.0;
    return detail::fit_constants(n, g, 0.0, [](double, Complex r, int) { return estimate_rhs_small(r, 1.0); });
}

}  // namespace oddhyp
