#pragma once

// The meromorphic quantities of the isometry and inversion formulas, evaluated
// along contours in S_{eps,A} and extrapolated as Re R -> infinity.
//
//   inner_t(lambda, R) = c_n int_0^R Phi_lambda(r) nu_{2t}(r) sin^{2n} r dr -> e^{t(lambda^2+n^2)}
//   I(R) = int |fhat|^2 e^{-t(lambda^2+n^2)} inner_t(lambda, R) dmu           -> ||f||^2
//   J(R) = int fhat e^{-t(lambda^2+n^2)/2} inner_{t/2}(lambda, R) dmu         -> f(0)

#include "oddhyp/contour.hpp"
#include "oddhyp/core/errors.hpp"
#include "oddhyp/core/quadrature.hpp"
#include "oddhyp/core/scalar.hpp"
#include "oddhyp/kernels.hpp"
#include "oddhyp/spectral.hpp"
#include "oddhyp/spherical.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace oddhyp {

struct LimitConfig {
    PoleRegion region{0.3, 1.0};
    double detour = 0.6;
    double im_offset = 0.3;
    int j_min = 2;
    int j_max = 8;
    double panel = 0.25;
    double rel_floor = 1e-10;
    /// Grid nodes whose spectral weight is below this fraction of the total are skipped.
    double weight_cutoff = 1e-18;

    void validate() const {
        region.validate();
        if (!(detour > region.eps && detour < region.A)) throw ConfigError("LimitConfig: need eps < detour < A");
        if (j_min < 1 || j_max < j_min + 1) throw ConfigError("LimitConfig: need 1 <= j_min < j_max");
        if (!(panel > 0)) throw ConfigError("LimitConfig: panel length must be positive");
    }

    /// R_j = (j + 1/2) pi + i im_offset.
    std::vector<Complex> targets() const {
        std::vector<Complex> out;
        for (int j = j_min; j <= j_max; ++j) out.emplace_back((j + 0.5) * kPi, im_offset);
        return out;
    }

    /// Raise j_max until the Gaussian tail e^{-(R - 2 t lambda)^2/(4t)} of the
    /// inner integral is below 1e-18 at the last target.
    LimitConfig extended_for(double lambda, double t) const {
        LimitConfig c = *this;
        const double need = 2.0 * t * lambda + 13.0 * std::sqrt(t);
        while ((c.j_max + 0.5) * kPi < need) ++c.j_max;
        return c;
    }
};

struct LimitReport {
    nlohmann::ordered_json params;
    std::vector<Complex> R_sequence;
    std::vector<Complex> values;
    Complex extrapolated{};
    double target = 0.0;
    double residual = 0.0;
    std::vector<double> boundary_max;
    double quad_error = 0.0;
    double tolerance = 0.0;

    bool passed() const { return residual <= tolerance; }

    nlohmann::ordered_json to_json() const {
        auto pair = [](Complex z) { return nlohmann::ordered_json::array({z.real(), z.imag()}); };
        nlohmann::ordered_json j;
        j["params"] = params;
        j["R_sequence"] = nlohmann::ordered_json::array();
        for (auto R : R_sequence) j["R_sequence"].push_back(pair(R));
        j["values"] = nlohmann::ordered_json::array();
        for (auto v : values) j["values"].push_back(pair(v));
        j["extrapolated"] = pair(extrapolated);
        j["target"] = target;
        j["residual"] = residual;
        j["boundary_max"] = boundary_max;
        j["quad_error"] = quad_error;
        j["tolerance"] = tolerance;
        return j;
    }
};

/// Richardson extrapolation with the model a + c/R from the last two values.
inline Complex extrapolate_limit(const std::vector<Complex>& R, const std::vector<Complex>& v) {
    if (R.size() != v.size() || R.empty()) throw ConfigError("extrapolate_limit: mismatched sequences");
    if (R.size() == 1) return v.back();
    const std::size_t b = R.size() - 1, a = b - 1;
    return (R[b] * v[b] - R[a] * v[a]) / (R[b] - R[a]);
}

/// Fill in extrapolated value and residual; NonConvergence if the distance to
/// the target grows over the last three values above the relative floor.
inline void finish_report(LimitReport& rep, double rel_floor) {
    rep.extrapolated = extrapolate_limit(rep.R_sequence, rep.values);
    const double scale = std::max(std::abs(rep.target), 1e-300);
    rep.residual = std::abs(rep.extrapolated - rep.target) / scale;
    const std::size_t N = rep.values.size();
    if (N >= 3) {
        const double floor = rel_floor * scale + 2.0 * rep.quad_error;
        for (std::size_t k = N - 2; k < N; ++k) {
            const double prev = std::abs(rep.values[k - 1] - rep.target);
            const double cur = std::abs(rep.values[k] - rep.target);
            if (cur > floor && cur > prev)
                throw NonConvergence("limit: residual does not decrease along the R sequence");
        }
    }
}

// ---- inner integral ------------------------------------------------------------

namespace detail {

/// c_n nu_{2t} S^{2n-1}, pole free; the integrand is [Phi S^{2n-1}] [this] / S^{2n-2}.
inline SymExpr inner_kernel_expr(int n, double t) {
    const SymExpr nu = unwrapped_heat_kernel(n, 2.0 * t);
    if (n == 0) return nu * Scalar(2);
    return nu.times_sin_pow(2 * n - 1) * surface_constant_scalar(n);
}

inline SphericalExpr inner_phi_expr(double lambda, int n) {
    const SphericalExpr phi = spherical_phi_expr(lambda, n);
    return n == 0 ? phi : phi.times_sin_pow(2 * n - 1);
}

inline Complex inner_divisor(int n, Complex z) { return n <= 1 ? Complex(1.0, 0.0) : ipow(std::sin(z), 2 * n - 2); }

}  // namespace detail

/// c_n int_path Phi_lambda(r) nu_{2t}(r) sin^{2n} r dr with adaptive quadrature.
inline QuadResult spher_heat_integral(double lambda, double t, int n, const ContourPath& path,
                                      const QuadTolerance& tol = {0.0, 1e-13, 4000}) {
    const SymExpr K = detail::inner_kernel_expr(n, t);
    const SphericalExpr P = detail::inner_phi_expr(lambda, n);
    return contour_quad([&](Complex z) { return P.evaluate(z) * K.evaluate(z) / detail::inner_divisor(n, z); }, path,
                        tol);
}

/// Inner integrals for many lambda and several targets on a shared fixed rule.
/// The kernel factor is sampled once.
class InnerIntegrals {
public:
    InnerIntegrals(int n, double t, const MultiTargetRule& rule) : n_(n), t_(t), rule_(&rule) {
        const SymExpr K = detail::inner_kernel_expr(n, t);
        for (const auto& z : rule.rule().nodes) kernel_.push_back(K.evaluate(z) / detail::inner_divisor(n, z));
    }

    MultiTargetRule::Sums operator()(double lambda) const {
        const SphericalExpr P = detail::inner_phi_expr(lambda, n_);
        const auto& nodes = rule_->rule().nodes;
        std::vector<Complex> samples(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) samples[i] = P.evaluate(nodes[i]) * kernel_[i];
        return rule_->integrate(samples);
    }

    int n() const { return n_; }
    double t() const { return t_; }

private:
    int n_;
    double t_;
    const MultiTargetRule* rule_;
    std::vector<Complex> kernel_;
};

inline nlohmann::ordered_json limit_params(int n, double t, const LimitConfig& cfg) {
    nlohmann::ordered_json j;
    j["n"] = n;
    j["t"] = t;
    j["eps"] = cfg.region.eps;
    j["A"] = cfg.region.A;
    j["detour"] = cfg.detour;
    j["im_offset"] = cfg.im_offset;
    j["j_min"] = cfg.j_min;
    j["j_max"] = cfg.j_max;
    j["panel"] = cfg.panel;
    return j;
}

/// Extrapolated inner_t(lambda, R) against e^{t(lambda^2+n^2)}.
inline LimitReport spher_heat_limit_check(double lambda, double t, int n, const LimitConfig& cfg = {},
                                          double tolerance = 1e-5) {
    cfg.validate();
    LimitReport rep;
    rep.params = limit_params(n, t, cfg);
    rep.params["lambda"] = lambda;
    rep.R_sequence = cfg.targets();
    const MultiTargetRule rule(rep.R_sequence, cfg.region, cfg.detour, cfg.panel);
    const InnerIntegrals inner(n, t, rule);
    const auto sums = inner(lambda);
    rep.values = sums.value;
    rep.quad_error = sums.error.back();
    rep.target = std::exp(t * (lambda * lambda + double(n) * n));
    rep.tolerance = tolerance;
    finish_report(rep, cfg.rel_floor);
    return rep;
}

// ---- orbital integral ------------------------------------------------------------

/// O(ir) = int |fhat|^2 e^{-t(lambda^2+n^2)} Phi_lambda(r) dmu.
inline Complex orbital_integral(const SpectralProfile& p, double t, Complex r, double eps = 1e-8) {
    const int n = p.n();
    if (n > 0) {
        const long m = std::lround(r.real() / kPi);
        if (m != 0 && std::abs(r - Complex(m * kPi, 0.0)) < eps)
            throw PoleError("orbital_integral: r at a pole");
    }
    Complex acc{};
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double l = p.nodes()[i];
        const double w = p.mu_weight(i) * std::norm(p.values()[i]) * std::exp(-t * (l * l + double(n) * n));
        if (w == 0.0) continue;
        acc += w * phi_i(l, n, r);
    }
    return acc;
}

// ---- isometry ------------------------------------------------------------------

namespace detail {

/// Indices of grid nodes carrying spectral weight above cutoff * total.
inline std::vector<std::size_t> active_nodes(const std::vector<double>& weight, double cutoff) {
    double total = 0.0;
    for (double w : weight) total += std::abs(w);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < weight.size(); ++i)
        if (std::abs(weight[i]) > cutoff * total) idx.push_back(i);
    return idx;
}

inline std::vector<double> isometry_mass(const SpectralProfile& p) {
    std::vector<double> m(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) m[i] = p.mu_weight(i) * std::norm(p.values()[i]);
    return m;
}

struct SpectralSums {
    std::vector<Complex> value;
    std::vector<double> error;
};

/// sum_i coeff_i inner(lambda_i, R_j) over the active nodes.
inline SpectralSums spectral_sum(const SpectralProfile& p, const std::vector<Complex>& coeff,
                                 const std::vector<std::size_t>& active, const InnerIntegrals& inner,
                                 std::size_t targets) {
    SpectralSums out{std::vector<Complex>(targets), std::vector<double>(targets, 0.0)};
    for (auto i : active) {
        const auto s = inner(p.nodes()[i]);
        for (std::size_t j = 0; j < targets; ++j) {
            out.value[j] += coeff[i] * s.value[j];
            out.error[j] += std::abs(coeff[i]) * s.error[j];
        }
    }
    return out;
}

inline std::vector<Complex> isometry_coeff(const SpectralProfile& p, double t) {
    std::vector<Complex> c(p.size());
    const double n2 = double(p.n()) * p.n();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double l = p.nodes()[i];
        c[i] = p.mu_weight(i) * std::norm(p.values()[i]) * std::exp(-t * (l * l + n2));
    }
    return c;
}

}  // namespace detail

struct SpectralContourResult {
    std::vector<Complex> values;
    std::vector<double> errors;
};

/// I(R) along each of the given paths.
inline SpectralContourResult isometry_I(const SpectralProfile& p, double t, const std::vector<ContourPath>& paths,
                                        double panel = 0.25, double weight_cutoff = 1e-18) {
    const MultiTargetRule rule(paths, panel);
    const InnerIntegrals inner(p.n(), t, rule);
    const auto active = detail::active_nodes(detail::isometry_mass(p), weight_cutoff);
    const auto s = detail::spectral_sum(p, detail::isometry_coeff(p, t), active, inner, paths.size());
    return {s.value, s.error};
}

inline QuadResult isometry_I(const SpectralProfile& p, double t, const ContourPath& path, double panel = 0.25) {
    const auto r = isometry_I(p, t, std::vector<ContourPath>{path}, panel);
    QuadResult q;
    q.value = r.values[0];
    q.error = r.errors[0];
    return q;
}

/// Boundary terms BT_1..BT_n of the integrations by parts moving L^n off w_t,
/// for one lambda at R. They sum with the bulk to inner_t(lambda, R).
class BoundaryTerms {
public:
    BoundaryTerms(double lambda, int n, double t) : n_(n) {
        const SymExpr w = w_kernel(n, t);
        SphericalExpr f = spherical_phi_expr(lambda, n);
        for (int j = 1; j <= n; ++j) {
            const int k = n - j;
            f_.push_back(f);
            g_.push_back(w.apply_L(k));
            coeff_.push_back(-surface_constant(k) / (2.0 * k + 1.0));
            f = f.apply_T(k);
        }
    }

    std::vector<Complex> operator()(Complex R) const {
        std::vector<Complex> out;
        const Complex S = std::sin(R);
        for (int j = 1; j <= n_; ++j) {
            const int k = n_ - j;
            out.push_back(coeff_[j - 1] * f_[j - 1].evaluate(R) * g_[j - 1].evaluate(R) * ipow(S, 2 * k + 1));
        }
        return out;
    }

private:
    int n_;
    std::vector<SphericalExpr> f_;
    std::vector<SymExpr> g_;
    std::vector<double> coeff_;
};

struct IbpResult {
    Complex R{};
    Complex direct{};  // I(R)
    Complex bulk{};
    std::vector<Complex> boundary;
    double quad_error = 0.0;

    Complex reconstructed() const {
        Complex s = bulk;
        for (auto b : boundary) s += b;
        return s;
    }
    double residual() const { return std::abs(reconstructed() - direct) / std::max(std::abs(direct), 1e-300); }
};

/// bulk = int |fhat|^2 e^{-t(lambda^2+n^2)} [2 int_0^R cosh(lambda r) w_t(r) dr] dmu and the
/// lambda-integrated boundary terms, together with I(R), for each target.
inline std::vector<IbpResult> isometry_ibp(const SpectralProfile& p, double t, const std::vector<Complex>& targets,
                                           const LimitConfig& cfg = {}) {
    cfg.validate();
    const int n = p.n();
    for (const auto& R : targets) {
        const long m = std::lround(R.real() / kPi);
        if (m != 0 && std::abs(R - Complex(m * kPi, 0.0)) < cfg.region.eps)
            throw PoleError("isometry_ibp: R too close to a pole");
    }
    const MultiTargetRule rule(targets, cfg.region, cfg.detour, cfg.panel);
    const InnerIntegrals inner(n, t, rule);
    const auto coeff = detail::isometry_coeff(p, t);
    const auto active = detail::active_nodes(detail::isometry_mass(p), cfg.weight_cutoff);
    const auto direct = detail::spectral_sum(p, coeff, active, inner, targets.size());

    const SymExpr w = w_kernel(n, t) * Scalar(2);
    std::vector<Complex> wv;
    for (const auto& z : rule.rule().nodes) wv.push_back(w.evaluate(z));

    std::vector<IbpResult> out(targets.size());
    for (std::size_t j = 0; j < targets.size(); ++j) {
        out[j].R = targets[j];
        out[j].direct = direct.value[j];
        out[j].boundary.assign(n, Complex{});
        out[j].quad_error = direct.error[j];
    }
    std::vector<Complex> samples(wv.size());
    for (auto i : active) {
        const double l = p.nodes()[i];
        for (std::size_t k = 0; k < wv.size(); ++k) samples[k] = std::cosh(l * rule.rule().nodes[k]) * wv[k];
        const auto bulk = rule.integrate(samples);
        const BoundaryTerms bt(l, n, t);
        for (std::size_t j = 0; j < targets.size(); ++j) {
            out[j].bulk += coeff[i] * bulk.value[j];
            out[j].quad_error += std::abs(coeff[i]) * bulk.error[j];
            const auto b = bt(targets[j]);
            for (int k = 0; k < n; ++k) out[j].boundary[k] += coeff[i] * b[k];
        }
    }
    return out;
}

/// max over the grid of |fhat|^2 e^{-t(lambda^2+n^2)} rho(lambda) |sum_j BT_j(lambda, R)|.
inline double boundary_max(const SpectralProfile& p, double t, Complex R) {
    const int n = p.n();
    const auto dens = p.density();
    double mx = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double l = p.nodes()[i];
        const double w = std::norm(p.values()[i]) * std::exp(-t * (l * l + double(n) * n)) * dens(l);
        if (w == 0.0) continue;
        Complex s{};
        for (auto b : BoundaryTerms(l, n, t)(R)) s += b;
        mx = std::max(mx, w * std::abs(s));
    }
    return mx;
}

/// I(R_j) along the standard targets, extrapolated against ||f||^2.
inline LimitReport isometry_limit(const SpectralProfile& p, double t, const LimitConfig& cfg = {},
                                  double tolerance = 1e-4) {
    cfg.validate();
    LimitReport rep;
    rep.params = limit_params(p.n(), t, cfg);
    rep.params["lambda_max"] = p.lambda_max();
    rep.params["grid"] = p.size();
    rep.R_sequence = cfg.targets();
    std::vector<ContourPath> paths = MultiTargetRule::contours_for(rep.R_sequence, cfg.region, cfg.detour);
    const auto r = isometry_I(p, t, paths, cfg.panel, cfg.weight_cutoff);
    rep.values = r.values;
    rep.quad_error = r.errors.back();
    for (const auto& R : rep.R_sequence) rep.boundary_max.push_back(boundary_max(p, t, R));
    rep.target = plancherel_norm(p);
    rep.tolerance = tolerance;
    finish_report(rep, cfg.rel_floor);
    return rep;
}

// ---- inversion ------------------------------------------------------------------

namespace detail {

inline std::vector<Complex> inversion_coeff(const SpectralProfile& p, double t) {
    std::vector<Complex> c(p.size());
    const double n2 = double(p.n()) * p.n();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double l = p.nodes()[i];
        c[i] = p.mu_weight(i) * p.values()[i] * std::exp(-t * (l * l + n2) / 2.0);
    }
    return c;
}

inline std::vector<double> inversion_mass(const SpectralProfile& p) {
    std::vector<double> m(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) m[i] = p.mu_weight(i) * std::abs(p.values()[i]);
    return m;
}

}  // namespace detail

/// J(R) along each path; the inner bracket is spher_heat_integral at time t/2.
inline SpectralContourResult inversion_J(const SpectralProfile& p, double t, const std::vector<ContourPath>& paths,
                                         double panel = 0.25, double weight_cutoff = 1e-18) {
    const MultiTargetRule rule(paths, panel);
    const InnerIntegrals inner(p.n(), t / 2.0, rule);
    const auto active = detail::active_nodes(detail::inversion_mass(p), weight_cutoff);
    const auto s = detail::spectral_sum(p, detail::inversion_coeff(p, t), active, inner, paths.size());
    return {s.value, s.error};
}

inline LimitReport inversion_limit(const SpectralProfile& p, double t, const LimitConfig& cfg = {},
                                   double tolerance = 1e-4) {
    cfg.validate();
    LimitReport rep;
    rep.params = limit_params(p.n(), t, cfg);
    rep.params["lambda_max"] = p.lambda_max();
    rep.params["grid"] = p.size();
    rep.R_sequence = cfg.targets();
    const auto paths = MultiTargetRule::contours_for(rep.R_sequence, cfg.region, cfg.detour);
    const auto r = inversion_J(p, t, paths, cfg.panel, cfg.weight_cutoff);
    rep.values = r.values;
    rep.quad_error = r.errors.back();
    rep.target = inverse_transform(p, 0.0).value.real();
    rep.tolerance = tolerance;
    finish_report(rep, cfg.rel_floor);
    return rep;
}

/// e^{t n^2/2} int_R [2 int_0^Lambda cosh(lambda y) e^{-t(lambda^2+n^2)/2} fhat dmu] G_t(y) dy.
inline QuadResult general_inversion_rank1(const SpectralProfile& p, double t,
                                          const QuadTolerance& tol = {1e-300, 1e-13, 4000}) {
    const int n = p.n();
    const auto coeff = detail::inversion_coeff(p, t);
    const auto active = detail::active_nodes(detail::inversion_mass(p), 1e-20);
    if (active.empty()) return {};
    double lmax = 0.0;
    for (auto i : active) lmax = std::max(lmax, p.nodes()[i]);
    const double Y = t * lmax + 12.0 * std::sqrt(t);
    const double pref = std::exp(t * n * n / 2.0) / std::sqrt(kTwoPi * t);
    auto h = [&](double y) {
        Complex acc{};
        for (auto i : active) {
            const double l = p.nodes()[i];
            // cosh(l y) e^{-y^2/(2t)} without overflow
            const double e1 = l * y - y * y / (2.0 * t), e2 = -l * y - y * y / (2.0 * t);
            acc += coeff[i] * 0.5 * (std::exp(e1) + std::exp(e2));
        }
        return 2.0 * pref * acc;  // the y-integrand is even
    };
    return integrate_interval(h, 0.0, Y, tol);
}

// ---- surjectivity ------------------------------------------------------------------

enum class Verdict { finite, divergent, undecided };

inline const char* verdict_name(Verdict v) {
    return v == Verdict::finite ? "finite" : v == Verdict::divergent ? "divergent" : "undecided";
}

struct SurjectivityOptions {
    LimitConfig limits{};
    /// Divergent once a partial sum exceeds cap_ratio times the first nonzero one.
    double cap_ratio = 1e4;
    /// Finite when the last relative increment is below this.
    double settle = 1e-6;
    int nodes_per_panel = 40;
    bool throw_on_divergence = false;
};

struct SurjectivityResult {
    Verdict verdict = Verdict::undecided;
    std::vector<double> cutoffs;       // 1/eps
    std::vector<double> partial_sums;  // lim_R I(R; F_eps)
    std::vector<double> residuals;     // extrapolation change between the last two targets
    SpectralProfile recovered;         // fhat = Fhat e^{t(lambda^2+n^2)/2} on lambda < 1/eps_last
};

/// For each cutoff eps, lim_R I(R; F_eps) with Fhat_eps = Fhat 1_{lambda < 1/eps}, on a
/// composite Gauss-Legendre grid whose panels end at every 1/eps.
inline SurjectivityResult surjectivity_diagnostic(const std::function<Complex(double)>& Fhat, int n, double t,
                                                  std::vector<double> eps, const SurjectivityOptions& opt = {}) {
    if (eps.empty()) throw ConfigError("surjectivity_diagnostic: no cutoffs");
    for (std::size_t k = 1; k < eps.size(); ++k)
        if (!(eps[k] < eps[k - 1])) throw ConfigError("surjectivity_diagnostic: cutoffs must decrease");
    if (!(eps.back() > 0)) throw ConfigError("surjectivity_diagnostic: cutoffs must be positive");
    SurjectivityResult res;
    std::vector<double> breaks{0.0};
    for (double e : eps) {
        const double L = 1.0 / e;
        res.cutoffs.push_back(L);
        // unit panels up to each cutoff
        while (breaks.back() + 1.0 < L - 1e-12) breaks.push_back(breaks.back() + 1.0);
        breaks.push_back(L);
    }
    const double Lmax = res.cutoffs.back();
    const auto rule = QuadratureRule::composite(breaks, opt.nodes_per_panel);
    const SpectralProfile q = SpectralProfile::from_rule(n, plancherel_constant(n), Lmax, rule, Fhat);

    const LimitConfig cfg = opt.limits.extended_for(Lmax, t);
    cfg.validate();
    const auto targets = cfg.targets();
    const MultiTargetRule mrule(targets, cfg.region, cfg.detour, cfg.panel);
    const InnerIntegrals inner(n, t, mrule);

    // per-node contributions |Fhat|^2 inner_t(lambda, R_j) dmu
    std::vector<std::vector<Complex>> contrib(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double w = q.mu_weight(i) * std::norm(q.values()[i]);
        if (w == 0.0) {
            contrib[i].assign(targets.size(), Complex{});
            continue;
        }
        auto s = inner(q.nodes()[i]);
        for (auto& v : s.value) v *= w;
        contrib[i] = std::move(s.value);
    }
    for (double L : res.cutoffs) {
        std::vector<Complex> v(targets.size());
        for (std::size_t i = 0; i < q.size(); ++i) {
            if (!(q.nodes()[i] < L)) continue;
            for (std::size_t j = 0; j < targets.size(); ++j) v[j] += contrib[i][j];
        }
        const Complex lim = extrapolate_limit(targets, v);
        res.partial_sums.push_back(lim.real());
        res.residuals.push_back(std::abs(v.back() - v[v.size() - 2]));
    }

    const auto& S = res.partial_sums;
    const std::size_t K = S.size();
    double first = 0.0;
    for (double s : S)
        if (s > 0) {
            first = s;
            break;
        }
    bool rising = K >= 3;
    for (std::size_t k = (K >= 3 ? K - 2 : 1); k < K; ++k) rising = rising && S[k] > S[k - 1] * (1.0 + 1e-3);
    const bool settled =
        K >= 2 ? std::abs(S[K - 1] - S[K - 2]) <= opt.settle * std::max(std::abs(S[K - 1]), 1e-300) || S[K - 1] == 0.0
               : false;
    if (first > 0 && S.back() > opt.cap_ratio * first && rising)
        res.verdict = Verdict::divergent;
    else if (settled || (K >= 1 && S.back() == 0.0))
        res.verdict = Verdict::finite;

    if (res.verdict == Verdict::divergent && opt.throw_on_divergence)
        throw DivergenceDetected("surjectivity_diagnostic: partial sums exceed the cap and keep rising");
    if (res.verdict == Verdict::finite) {
        const double n2 = double(n) * n;
        res.recovered = q.map([&](double l, Complex v) { return v * std::exp(t * (l * l + n2) / 2.0); });
    }
    return res;
}

// ---- estimates -------------------------------------------------------------------

struct BoundFit {
    double coarse = 0.0;
    double fine = 0.0;
    bool finite = false;
    bool stable = false;
    double ratio() const { return coarse > 0 ? fine / coarse : 0.0; }
    bool passed() const { return finite && stable; }
};

inline BoundFit make_fit(double coarse, double fine, double stable_ratio) {
    BoundFit f;
    f.coarse = coarse;
    f.fine = fine;
    f.finite = std::isfinite(coarse) && std::isfinite(fine);
    f.stable = f.finite && fine <= stable_ratio * coarse && coarse <= stable_ratio * fine;
    return f;
}

/// sup_R |e^{lambda R} R^m e^{-a R^2/2}| <= C (1 + lambda^m) e^{lambda^2/(2a)} over the
/// region samples; C is fitted on a grid and on its refinement.
inline BoundFit gauss_sup_bound_check(double a, int m, const std::vector<double>& lambdas, const PoleRegion& region,
                                      int density = 3, double stable_ratio = 1.25) {
    if (!(a > 0)) throw ConfigError("gauss_sup_bound_check: a must be positive");
    double lmax = 0.0;
    for (double l : lambdas) lmax = std::max(lmax, l);
    const double re_max = lmax / a + 8.0 / std::sqrt(a) + 2.0;
    auto fit = [&](int d) {
        const auto pts = region_sample(region.eps, region.A, 0.0, re_max, d);
        double C = 0.0;
        for (double l : lambdas) {
            double sup = 0.0;
            for (const auto& R : pts) {
                if (!region.contains(R)) continue;
                const Complex v = std::exp(l * R - a * R * R / 2.0) * ipow(R, m);
                sup = std::max(sup, std::abs(v));
            }
            C = std::max(C, sup / ((1.0 + std::pow(l, m)) * std::exp(l * l / (2.0 * a))));
        }
        return C;
    };
    return make_fit(fit(density), fit(2 * density - 1), stable_ratio);
}

/// |BT_j(lambda, R)| <= C e^{t lambda^2} / |R| for lambda > 1 and Re R > 1 in the region.
inline BoundFit boundary_bound_fit(int n, double t, double lambda_max = 6.0, const PoleRegion& region = {},
                                   int lambda_count = 10, int density = 3, double stable_ratio = 1.25) {
    const double re_max = 2.0 * t * lambda_max + 8.0 * std::sqrt(t) + 2.0;
    auto fit = [&](int lc, int d) {
        const auto pts = region_sample(region.eps, region.A, 1.0, re_max, d);
        double C = 0.0;
        for (int a = 1; a <= lc; ++a) {
            const double l = 1.0 + (lambda_max - 1.0) * a / lc;
            const BoundaryTerms bt(l, n, t);
            for (const auto& R : pts) {
                if (!region.contains(R) || !(R.real() > 1.0)) continue;
                for (const auto& b : bt(R)) C = std::max(C, std::abs(b) * std::abs(R) / std::exp(t * l * l));
            }
        }
        return C;
    };
    return make_fit(fit(lambda_count, density), fit(2 * lambda_count, 2 * density - 1), stable_ratio);
}

}  // namespace oddhyp
