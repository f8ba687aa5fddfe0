#pragma once

// Heat kernels on R, H^{2n+1} and S^{2n+1}, the unwrapped kernel nu_t, and the
// shift operators D, D~ and their formal adjoints D* = L^n (hyperbolic) and
// D~* = L^n (circular).

#include "oddhyp/core/errors.hpp"
#include "oddhyp/core/quadrature.hpp"
#include "oddhyp/core/scalar.hpp"
#include "oddhyp/diffop.hpp"
#include "oddhyp/spherical.hpp"
#include "oddhyp/trigexpr.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace oddhyp {

/// c_n = 2 (2 pi)^n / (2n-1)!!, the area of the unit sphere in R^{2n+1}.
inline Scalar surface_constant_scalar(int n) {
    Scalar out = 2;
    for (int k = 0; k < n; ++k) out *= two_pi_scalar();
    return out / double_factorial_odd(n);
}

inline double surface_constant(int n) { return to_double(surface_constant_scalar(n)); }

struct ModelParams {
    int n = 1;
    double t = 1.0;

    int dim() const { return 2 * n + 1; }
    double delta() const { return n; }
    int flat_dim() const { return 1; }
    double c_n() const { return surface_constant(n); }

    void validate() const {
        if (n < 0) throw ConfigError("ModelParams: n must be nonnegative");
        if (!(t > 0)) throw ConfigError("ModelParams: t must be positive");
    }
};

/// (2 pi t)^{-1/2} exp(-r^2/(2t)).
inline SymExpr euclid_heat_kernel(double t, Flavor f = Flavor::circular) {
    const Scalar ts(t);
    return SymExpr::gaussian(1 / boost::multiprecision::sqrt(two_pi_scalar() * ts), 1 / (2 * ts), f);
}

/// nu_t = e^{t n^2 / 2} L^n [euclid], circular flavor.
inline SymExpr unwrapped_heat_kernel(int n, double t) {
    const Scalar ts(t);
    return euclid_heat_kernel(t).apply_L(n) * boost::multiprecision::exp(ts * n * n / 2);
}

/// gamma_t = e^{-t n^2 / 2} L^n [euclid], hyperbolic flavor.
inline SymExpr hyperbolic_heat_kernel(int n, double t) {
    const Scalar ts(t);
    return euclid_heat_kernel(t, Flavor::hyperbolic).apply_L(n) * boost::multiprecision::exp(-ts * n * n / 2);
}

/// w_t = e^{t n^2} e^{-r^2/(4t)} / (4 pi t)^{1/2}.
inline SymExpr w_kernel(int n, double t) {
    const Scalar ts(t);
    return euclid_heat_kernel(2 * t) * boost::multiprecision::exp(ts * n * n);
}

/// Jet of the 2pi-periodized Gaussian sum_{|j|<=K} (2 pi t)^{-1/2} exp(-(r - 2 pi j)^2/(2t)).
inline JetFunction periodized_gaussian_jet(double t, int K) {
    return [t, K](Complex r, int m) {
        std::vector<Complex> out(m + 1, Complex(0.0, 0.0));
        const double st = std::sqrt(t);
        const double norm = 1.0 / std::sqrt(kTwoPi * t);
        std::vector<Complex> he(m + 1);
        for (int j = -K; j <= K; ++j) {
            const Complex x = r - kTwoPi * j;
            const Complex y = x / st;
            const Complex g = norm * std::exp(-x * x / (2.0 * t));
            // d^k/dx^k g = (-1)^k t^{-k/2} He_k(x/sqrt t) g
            he[0] = 1.0;
            if (m >= 1) he[1] = y;
            for (int k = 1; k < m; ++k) he[k + 1] = y * he[k] - static_cast<double>(k) * he[k - 1];
            double scale = 1.0;
            for (int k = 0; k <= m; ++k) {
                out[k] += scale * he[k] * g;
                scale *= -1.0 / st;
            }
        }
        return out;
    };
}

/// Heat kernel on S^{2n+1}: e^{t n^2/2} D~*[periodized Gaussian], truncated at |j| <= K.
class SphereHeatKernel {
public:
    SphereHeatKernel(int n, double t, int K)
        : n_(n), t_(t), K_(K), op_(ops::shift_star(n, Flavor::circular)), jet_(periodized_gaussian_jet(t, K)),
          scale_(std::exp(t * n * n / 2.0)) {
        if (K < 3) throw ConfigError("SphereHeatKernel: wrap count K must be at least 3");
    }

    int wrap() const { return K_; }

    /// Bound on the discarded Gaussian images, e^{-(2 pi K - pi)^2/(2t)}.
    double tail_bound() const {
        const double d = kTwoPi * K_ - kPi;
        return std::exp(-d * d / (2.0 * t_));
    }

    Complex evaluate(Complex r) const {
        // The operator coefficients are singular at multiples of pi, where the
        // kernel itself is smooth; there use the Cauchy integral on a circle.
        const long m = std::lround(r.real() / kPi);
        const Complex center(m * kPi, 0.0);
        if (std::abs(r - center) < 0.35) {
            constexpr int N = 128;
            constexpr double rad = 0.5;
            Complex acc(0.0, 0.0);
            for (int j = 0; j < N; ++j) {
                const double th = kTwoPi * (j + 0.5) / N;
                const Complex dz = rad * Complex(std::cos(th), std::sin(th));
                acc += direct(center + dz) * dz / (center + dz - r);
            }
            return acc / static_cast<double>(N);
        }
        return direct(r);
    }

    double evaluate(double r) const { return evaluate(Complex(r, 0.0)).real(); }

private:
    Complex direct(Complex r) const { return scale_ * op_.apply(jet_, r); }

    int n_;
    double t_;
    int K_;
    DiffOp op_;
    JetFunction jet_;
    double scale_;
};

struct KernelSet {
    ModelParams params;
    SymExpr euclid;
    SymExpr nu_t;
    SymExpr gamma_t;
    SymExpr w_t;
    SphereHeatKernel rho_t;
};

inline KernelSet build_kernels(const ModelParams& p, int K = 8) {
    p.validate();
    if (K < 3) throw ConfigError("build_kernels: wrap count K must be at least 3");
    return KernelSet{p,
                     euclid_heat_kernel(p.t),
                     unwrapped_heat_kernel(p.n, p.t),
                     hyperbolic_heat_kernel(p.n, p.t),
                     w_kernel(p.n, p.t),
                     SphereHeatKernel(p.n, p.t, K)};
}

/// sum_{|j|<=K} nu_t(r + 2 pi j).
inline Complex periodize(const SymExpr& nu, Complex r, int K) {
    Complex acc(0.0, 0.0);
    for (int j = -K; j <= K; ++j) acc += nu.evaluate(r + kTwoPi * j);
    return acc;
}

// ---- shift operators ---------------------------------------------------------

/// D f (hyperbolic) or D~ f (circular) at r, from a jet of f.
inline Complex apply_shift_D(const JetFunction& f, int n, Complex r, Flavor flavor) {
    if (!f) throw DifferentiationFailure("apply_shift_D: no derivative source");
    return ops::shift(n, flavor).apply(f, r);
}

struct AdjointDecomposition {
    /// BT_1..BT_n, one per integration by parts, all evaluated at R.
    std::vector<Complex> boundary_terms;
    /// r -> 2 (D f)(r) g(r).
    std::function<Complex(Complex)> bulk_integrand;
    /// r -> c_n f(r) (D* g)(r) S(r)^{2n}.
    std::function<Complex(Complex)> lhs_integrand;
};

/// Decompose c_n int_0^R f (D* g) S^{2n} = sum_j BT_j + 2 int_0^R (D f) g.
///
/// BT_j = -(c_{n-j}/(2(n-j)+1)) f_{j-1}(R) (L^{n-j} g)(R) S(R)^{2(n-j)+1}, with
/// f_0 = f and f_j = T_{n-j} f_{j-1}.
inline AdjointDecomposition adjoint_decompose(const JetFunction& f, const SymExpr& g, Complex R, int n, Flavor flavor,
                                              double eps = 0.3) {
    if (g.flavor() != flavor) throw FlavorMismatch("adjoint_decompose: g has the wrong flavor");
    if (flavor == Flavor::circular) {
        const long m = std::lround(R.real() / kPi);
        if (m != 0 && std::abs(R - Complex(m * kPi, 0.0)) < eps)
            throw PoleError("adjoint_decompose: R too close to a multiple of pi");
    }
    AdjointDecomposition out;
    std::vector<SymExpr> Lg{g};
    for (int k = 1; k <= n; ++k) Lg.push_back(Lg.back().apply_L());
    const Complex S = flavor == Flavor::circular ? std::sin(R) : std::sinh(R);
    DiffOp chain = DiffOp::identity(flavor);
    for (int j = 1; j <= n; ++j) {
        const int k = n - j;
        const double coeff = -surface_constant(k) / (2.0 * k + 1.0);
        const Complex fj = chain.apply(f, R);
        out.boundary_terms.push_back(coeff * fj * Lg[k].evaluate(R) * ipow(S, 2 * k + 1));
        chain = ops::T(k, flavor) * chain;
    }
    const DiffOp D = ops::shift(n, flavor);
    out.bulk_integrand = [D, f, g](Complex r) { return 2.0 * D.apply(f, r) * g.evaluate(r); };
    const SymExpr star_g = Lg[n];
    const double cn = surface_constant(n);
    out.lhs_integrand = [f, star_g, cn, n, flavor](Complex r) {
        const Complex S = flavor == Flavor::circular ? std::sin(r) : std::sinh(r);
        return cn * f(r, 0)[0] * star_g.evaluate(r) * ipow(S, 2 * n);
    };
    return out;
}

struct IntertwiningResidual {
    double star = 0.0;   // radial Laplacian after D*  vs  D* after (d^2 -+ n^2)
    double shift = 0.0;  // D after radial Laplacian  vs  (d^2 -+ n^2) after D
    bool star_exact = false;
    bool shift_exact = false;
};

/// Check both intertwining identities for the given flavor on f, at `points`.
/// Residuals are scaled by 1 + |left side|. The *_exact flags report whether
/// the operator difference vanishes symbolically.
inline IntertwiningResidual verify_intertwining(int n, Flavor flavor, const JetFunction& f,
                                                const std::vector<Complex>& points) {
    const Scalar shift = flavor == Flavor::circular ? Scalar(n * n) : Scalar(-n * n);
    const DiffOp lap = ops::radial_laplacian(n, flavor);
    const DiffOp euc = ops::euclid_laplacian(shift, flavor);
    const DiffOp star = ops::shift_star(n, flavor);
    const DiffOp D = ops::shift(n, flavor);

    const DiffOp star_l = lap * star, star_r = star * euc;
    const DiffOp shift_l = D * lap, shift_r = euc * D;

    IntertwiningResidual out;
    const Scalar tiny("1e-40");
    out.star_exact = (star_l - star_r).near_zero(tiny, std::max(star_l.max_abs_coeff(), Scalar(1)));
    out.shift_exact = (shift_l - shift_r).near_zero(tiny, std::max(shift_l.max_abs_coeff(), Scalar(1)));
    for (const auto& r : points) {
        const Complex a = star_l.apply(f, r), b = star_r.apply(f, r);
        out.star = std::max(out.star, std::abs(a - b) / (1.0 + std::abs(a)));
        const Complex c = shift_l.apply(f, r), d = shift_r.apply(f, r);
        out.shift = std::max(out.shift, std::abs(c - d) / (1.0 + std::abs(c)));
    }
    return out;
}

/// 30 points in (0.3, pi - 0.3) + i [-0.5, 0.5] used by the default intertwining check.
inline std::vector<Complex> intertwining_grid(int count = 30) {
    std::vector<Complex> pts;
    for (int i = 0; i < count; ++i) {
        const double x = 0.3 + (kPi - 0.6) * (i + 0.5) / count;
        const double y = 0.5 * std::sin(1.7 * i);
        pts.emplace_back(x, y);
    }
    return pts;
}

// ---- normalizations ----------------------------------------------------------

/// c_n int_0^inf gamma_t sinh^{2n} dr, truncated at 10 sqrt t + 10 t n.
inline QuadResult hyperbolic_mass(int n, double t, const QuadTolerance& tol = {0.0, 1e-12, 4000}) {
    const SymExpr integrand = hyperbolic_heat_kernel(n, t).times_sin_pow(2 * n) * surface_constant_scalar(n);
    const double rmax = 10.0 * std::sqrt(t) + 10.0 * t * n;
    return integrate_interval([&](double r) { return integrand.evaluate(Complex(r, 0.0)); }, 0.0, rmax, tol);
}

/// c_n int_0^pi rho_t sin^{2n} dr.
inline QuadResult sphere_mass(int n, double t, int K = 8, const QuadTolerance& tol = {0.0, 1e-12, 4000}) {
    const SphereHeatKernel rho(n, t, K);
    const double cn = surface_constant(n);
    return integrate_interval(
        [&](double r) { return cn * rho.evaluate(Complex(r, 0.0)) * std::pow(std::sin(r), 2 * n); }, 0.0, kPi, tol);
}

}  // namespace oddhyp
