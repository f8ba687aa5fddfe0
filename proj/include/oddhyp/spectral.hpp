#pragma once

// Radial spherical Fourier analysis on H^{2n+1}: Plancherel density with a
// calibrated constant, forward and inverse transforms, heat multiplier and
// Sobolev weights, and a CSV format for spectral profiles.

#include "oddhyp/core/errors.hpp"
#include "oddhyp/core/quadrature.hpp"
#include "oddhyp/core/scalar.hpp"
#include "oddhyp/kernels.hpp"
#include "oddhyp/spherical.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace oddhyp {

struct SpectralDensity {
    int n = 1;
    double C = 1.0;

    double operator()(double lambda) const {
        double p = C;
        for (int k = 0; k < n; ++k) p *= lambda * lambda + double(k) * k;
        return p;
    }
};

struct Calibration {
    double C_n = 0.0;
    std::vector<double> t_samples;
    std::vector<double> per_t;
    double spread = 0.0;  // max relative deviation from the mean
};

/// Fit C_n from int_R e^{-t(lambda^2+n^2)/2} C_n prod(lambda^2+k^2) dlambda = gamma_t(0).
inline Calibration calibrate_plancherel(int n, const std::vector<double>& t_samples, double tol = 1e-8) {
    if (t_samples.empty()) throw ConfigError("calibrate_plancherel: no time samples");
    Calibration out;
    out.t_samples = t_samples;
    const SpectralDensity unit{n, 1.0};
    for (double t : t_samples) {
        if (!(t > 0)) throw ConfigError("calibrate_plancherel: times must be positive");
        const double cut = std::sqrt(2.0 * 80.0 / t) + 2.0 * n;
        const auto moment = integrate_interval(
            [&](double l) { return std::exp(-t * (l * l + double(n) * n) / 2.0) * unit(l); }, 0.0, cut,
            QuadTolerance{0.0, 1e-14, 4000});
        const double gamma0 = hyperbolic_heat_kernel(n, t).evaluate(Complex(0.0, 0.0)).real();
        out.per_t.push_back(gamma0 / (2.0 * moment.value.real()));
    }
    double mean = 0.0;
    for (double c : out.per_t) mean += c;
    mean /= out.per_t.size();
    for (double c : out.per_t) out.spread = std::max(out.spread, std::abs(c - mean) / mean);
    out.C_n = mean;
    if (out.spread > tol) throw InconsistentCalibration("calibrate_plancherel: constant varies across t");
    return out;
}

inline double plancherel_constant(int n) {
    static thread_local std::vector<double> cache;
    if (n < static_cast<int>(cache.size()) && cache[n] > 0) return cache[n];
    const double c = calibrate_plancherel(n, {0.5, 1.0, 2.0}).C_n;
    if (static_cast<int>(cache.size()) <= n) cache.resize(n + 1, 0.0);
    cache[n] = c;
    return c;
}

class SpectralProfile {
public:
    SpectralProfile() = default;
    SpectralProfile(int n, double C_n, double lambda_max, std::vector<double> nodes, std::vector<double> weights,
                    std::vector<Complex> values)
        : n_(n), C_n_(C_n), lambda_max_(lambda_max), nodes_(std::move(nodes)), weights_(std::move(weights)),
          values_(std::move(values)) {
        if (nodes_.size() != weights_.size() || nodes_.size() != values_.size())
            throw ConfigError("SpectralProfile: grid, weights and values differ in length");
        for (std::size_t i = 1; i < nodes_.size(); ++i)
            if (!(nodes_[i] > nodes_[i - 1])) throw ConfigError("SpectralProfile: grid must be strictly increasing");
    }

    /// Gauss-Legendre nodes on [0, lambda_max].
    static SpectralProfile from_function(int n, double C_n, double lambda_max, const std::function<Complex(double)>& fhat,
                                         int count = 400) {
        return from_rule(n, C_n, lambda_max, QuadratureRule::gauss_legendre(count, 0.0, lambda_max), fhat);
    }

    static SpectralProfile from_rule(int n, double C_n, double lambda_max, const QuadratureRule& rule,
                                     const std::function<Complex(double)>& fhat) {
        std::vector<Complex> vals;
        vals.reserve(rule.size());
        for (double l : rule.nodes) vals.push_back(fhat(l));
        return SpectralProfile(n, C_n, lambda_max, rule.nodes, rule.weights, std::move(vals));
    }

    int n() const { return n_; }
    double C_n() const { return C_n_; }
    double lambda_max() const { return lambda_max_; }
    SpectralDensity density() const { return {n_, C_n_}; }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<Complex>& values() const { return values_; }

    /// Quadrature weight for 2 int_0^{lambda_max} (.) dmu at node i.
    double mu_weight(std::size_t i) const { return 2.0 * weights_[i] * density()(nodes_[i]); }

    SpectralProfile with_values(std::vector<Complex> values) const {
        return SpectralProfile(n_, C_n_, lambda_max_, nodes_, weights_, std::move(values));
    }

    template <class F>
    SpectralProfile map(F&& f) const {
        std::vector<Complex> v(values_.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(nodes_[i], values_[i]);
        return with_values(std::move(v));
    }

private:
    int n_ = 1;
    double C_n_ = 1.0;
    double lambda_max_ = 0.0;
    std::vector<double> nodes_, weights_;
    std::vector<Complex> values_;
};

/// Smallest Lambda (a multiple of 0.25, at least `floor`) with
/// int_Lambda^inf h < tol * int_0^inf h, for a nonnegative integrand h.
inline double choose_lambda_max(const std::function<double(double)>& h, double floor, double tol = 1e-12) {
    double top = std::max(floor, 1.0);
    while (top < 400.0 && h(top) > 1e-300 && h(top) * top > 1e-40 * (1.0 + h(0.5 * top))) top *= 1.5;
    const QuadTolerance qt{0.0, 1e-13, 4000};
    const double total = integrate_interval(h, 0.0, top, qt).value.real();
    if (!(total > 0)) return floor;
    for (double L = 0.25; L < top; L += 0.25) {
        const double tail = integrate_interval(h, L, top, qt).value.real();
        if (tail < tol * total) return std::max(L, floor);
    }
    return std::max(top, floor);
}

/// |f(r)| <= M e^{-alpha r}.
struct DecayBound {
    double M = 1.0;
    double alpha = 1.0;
};

struct TransformOptions {
    double panel = 0.25;
    double tail_tol = 1e-14;
    int decay_samples = 200;
};

/// fhat(lambda) = c_n int_0^inf f(r) phi_lambda(r) sinh^{2n} r dr on the grid
/// `grid`. The radial integral is truncated where the decay bound certifies
/// the tail below tail_tol; f is sampled once and shared across lambda.
inline SpectralProfile forward_transform(const std::function<double(double)>& f, DecayBound bound, int n,
                                         const QuadratureRule& grid, double lambda_max, double C_n,
                                         const TransformOptions& opt = {}, double* error = nullptr) {
    if (!(bound.alpha > n)) throw DecayViolation("forward_transform: decay rate must exceed n");
    const double cn = surface_constant(n);
    const double gap = bound.alpha - n;
    // |phi_lambda(r)| sinh^{2n} r <= (1 + r) e^{n r} for r >= 0.
    auto tail = [&](double R) { return cn * bound.M * (1.0 + R + 1.0 / gap) * std::exp(-gap * R) / gap; };
    double rmax = 1.0;
    while (tail(rmax) > opt.tail_tol && rmax < 2000.0) rmax += 0.5;
    for (int i = 0; i <= opt.decay_samples; ++i) {
        const double r = rmax * i / opt.decay_samples;
        if (std::abs(f(r)) > bound.M * std::exp(-bound.alpha * r) * (1.0 + 1e-9) + 1e-300)
            throw DecayViolation("forward_transform: supplied decay bound fails at sampled point");
    }
    const int panels = std::max(1, static_cast<int>(std::ceil(rmax / opt.panel)));
    std::vector<double> breaks(panels + 1);
    for (int i = 0; i <= panels; ++i) breaks[i] = rmax * i / panels;
    const auto fine = QuadratureRule::composite(breaks, 20);
    const auto coarse = QuadratureRule::composite(breaks, 10);
    std::vector<double> f_fine, f_coarse;
    for (double r : fine.nodes) f_fine.push_back(f(r));
    for (double r : coarse.nodes) f_coarse.push_back(f(r));
    std::vector<Complex> values(grid.size());
    double err = tail(rmax);
    for (std::size_t a = 0; a < grid.size(); ++a) {
        const SphericalEval phi(grid.nodes[a], n, 0);
        auto integrate = [&](const QuadratureRule& rule, const std::vector<double>& fv) {
            double acc = 0.0;
            for (std::size_t i = 0; i < rule.size(); ++i) {
                const double r = rule.nodes[i];
                acc += rule.weights[i] * fv[i] * phi.phi_real(r) * std::pow(std::sinh(r), 2 * n);
            }
            return cn * acc;
        };
        const double hi = integrate(fine, f_fine);
        err = std::max(err, std::abs(hi - integrate(coarse, f_coarse)));
        values[a] = hi;
    }
    if (error) *error = err;
    return SpectralProfile(n, C_n, lambda_max, grid.nodes, grid.weights, std::move(values));
}

inline SpectralProfile forward_transform(const std::function<double(double)>& f, DecayBound bound, int n,
                                         double lambda_max, int count = 400, const TransformOptions& opt = {},
                                         double* error = nullptr) {
    return forward_transform(f, bound, n, QuadratureRule::gauss_legendre(count, 0.0, lambda_max), lambda_max,
                             plancherel_constant(n), opt, error);
}

struct InverseResult {
    Complex value{};
    /// Estimated mass of the discarded lambda > lambda_max range.
    double tail_estimate = 0.0;
    /// Set when the tail estimate exceeds 1e-10 (truncation warning).
    bool truncation_warning = false;
};

/// Gaussian extrapolation of 2 int_{lambda_max}^inf |fhat| |phi| dmu from the
/// last two grid nodes.
inline double spectral_tail_estimate(const SpectralProfile& p) {
    const std::size_t N = p.size();
    if (N < 2) return 0.0;
    const auto dens = p.density();
    const double l1 = p.nodes()[N - 2], l2 = p.nodes()[N - 1];
    const double a1 = std::abs(p.values()[N - 2]) * dens(l1);
    const double a2 = std::abs(p.values()[N - 1]) * dens(l2);
    if (a2 == 0.0) return 0.0;
    if (!(a1 > a2)) {
        // Not decaying: only acceptable at roundoff level relative to the peak.
        double peak = 0.0;
        for (std::size_t i = 0; i < N; ++i) peak = std::max(peak, std::abs(p.values()[i]) * dens(p.nodes()[i]));
        if (std::max(a1, a2) <= 1e-14 * peak) return 2.0 * std::max(a1, a2);
        return std::numeric_limits<double>::infinity();
    }
    const double b = std::log(a1 / a2) / (l2 * l2 - l1 * l1);
    const double L = p.lambda_max();
    const double aL = a2 * std::exp(-b * (L * L - l2 * l2));
    return 2.0 * aL / (2.0 * b * L);
}

/// f(r) = 2 int_0^{lambda_max} phi_lambda(r) fhat(lambda) dmu(lambda).
inline InverseResult inverse_transform(const SpectralProfile& p, double r) {
    InverseResult out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p.values()[i] == Complex(0.0, 0.0)) continue;
        out.value += p.mu_weight(i) * p.values()[i] * phi_real(p.nodes()[i], p.n(), r);
    }
    out.tail_estimate = spectral_tail_estimate(p);
    out.truncation_warning = out.tail_estimate > 1e-10;
    return out;
}

/// Pointwise multiply by e^{-t(lambda^2+n^2)/2}.
inline SpectralProfile heat_multiplier(const SpectralProfile& p, double t) {
    if (t < 0) throw ConfigError("heat_multiplier: t must be nonnegative");
    const double n = p.n();
    return p.map([&](double l, Complex v) { return v * std::exp(-t * (l * l + n * n) / 2.0); });
}

inline double sobolev_norm(const SpectralProfile& p, double s) {
    double acc = 0.0;
    const double n2 = double(p.n()) * p.n();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double l = p.nodes()[i];
        acc += p.mu_weight(i) * std::norm(p.values()[i]) * std::pow(1.0 + n2 + l * l, s);
    }
    return acc;
}

inline double plancherel_norm(const SpectralProfile& p) { return sobolev_norm(p, 0.0); }

// ---- CSV ---------------------------------------------------------------------

inline void write_profile_csv(const SpectralProfile& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IOError("cannot open " + path + " for writing");
    out << std::setprecision(17);
    out << "n,C_n,lambda_max\n" << p.n() << ',' << p.C_n() << ',' << p.lambda_max() << '\n';
    out << "lambda,re,im\n";
    for (std::size_t i = 0; i < p.size(); ++i)
        out << p.nodes()[i] << ',' << p.values()[i].real() << ',' << p.values()[i].imag() << '\n';
    if (!out) throw IOError("write failed for " + path);
}

namespace detail {

inline std::vector<double> split_csv_numbers(const std::string& line, std::size_t expect, const std::string& path) {
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(cell, &used));
        } catch (const std::exception&) {
            throw IOError("malformed number '" + cell + "' in " + path);
        }
    }
    if (v.size() != expect) throw IOError("wrong column count in " + path);
    return v;
}

}  // namespace detail

/// Reads the format written by write_profile_csv. Weights are Gauss-Legendre
/// when the grid matches the GL nodes on [0, lambda_max], trapezoid otherwise.
inline SpectralProfile read_profile_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open " + path);
    std::string line;
    std::getline(in, line);
    if (!std::getline(in, line)) throw IOError("missing header values in " + path);
    const auto head = detail::split_csv_numbers(line, 3, path);
    std::getline(in, line);
    std::vector<double> nodes;
    std::vector<Complex> values;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto row = detail::split_csv_numbers(line, 3, path);
        nodes.push_back(row[0]);
        values.emplace_back(row[1], row[2]);
    }
    const int n = static_cast<int>(head[0]);
    const double L = head[2];
    QuadratureRule rule = QuadratureRule::gauss_legendre(static_cast<int>(nodes.size()), 0.0, L);
    bool gl = !nodes.empty();
    for (std::size_t i = 0; gl && i < nodes.size(); ++i)
        gl = std::abs(rule.nodes[i] - nodes[i]) <= 1e-12 * std::max(1.0, L);
    if (!gl) rule = QuadratureRule::trapezoid(nodes);
    return SpectralProfile(n, head[1], L, nodes, rule.weights, std::move(values));
}

}  // namespace oddhyp
