#pragma once

// Invariant suites run by `oddhyp suite`. Each check records the measured
// quantity, the tolerance it is held to and whether it passed.

#include "oddhyp/cli/config.hpp"
#include "oddhyp/contour.hpp"
#include "oddhyp/diffop.hpp"
#include "oddhyp/family.hpp"
#include "oddhyp/kernels.hpp"
#include "oddhyp/limits.hpp"
#include "oddhyp/spectral.hpp"
#include "oddhyp/spherical.hpp"
#include "oddhyp/trigexpr.hpp"

#include <json.hpp>

#include <random>
#include <string>
#include <vector>

namespace oddhyp::cli {

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
};

struct SuiteReport {
    std::string name;
    nlohmann::ordered_json config;
    std::vector<Check> checks;

    bool passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return !checks.empty();
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["suite"] = name;
        j["config"] = config;
        j["passed"] = passed();
        j["checks"] = nlohmann::ordered_json::array();
        for (const auto& c : checks) {
            nlohmann::ordered_json e;
            e["name"] = c.name;
            e["value"] = c.value;
            e["tolerance"] = c.tolerance;
            e["passed"] = c.passed;
            if (!c.detail.empty()) e["detail"] = c.detail;
            j["checks"].push_back(e);
        }
        return j;
    }
};

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"symbolic", "kernels", "spectral", "isometry", "inversion",
                                                "surjectivity"};
    return names;
}

namespace detail {

class Recorder {
public:
    explicit Recorder(SuiteReport& r) : r_(r) {}

    /// value <= tol
    void below(const std::string& name, double value, double tol, std::string detail = {}) {
        r_.checks.push_back({name, value, tol, std::isfinite(value) && value <= tol, std::move(detail)});
    }
    void truth(const std::string& name, bool ok, std::string detail = {}) {
        r_.checks.push_back({name, ok ? 1.0 : 0.0, 1.0, ok, std::move(detail)});
    }
    /// Run body; an exception becomes a failed check.
    template <class F>
    void guarded(const std::string& name, F&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            r_.checks.push_back({name, std::numeric_limits<double>::infinity(), 0.0, false, e.what()});
        }
    }

private:
    SuiteReport& r_;
};

inline std::vector<Complex> random_region_points(std::mt19937_64& rng, int count, const PoleRegion& region,
                                                 double re_max) {
    std::uniform_real_distribution<double> re(0.1, re_max), im(-region.A * 0.95, region.A * 0.95);
    std::vector<Complex> pts;
    while (static_cast<int>(pts.size()) < count) {
        const Complex z(re(rng), im(rng));
        if (region.contains(z)) pts.push_back(z);
    }
    return pts;
}

inline void symbolic_suite(const RunConfig& cfg, Recorder& rec) {
    std::mt19937_64 rng(cfg.seed);
    const PoleRegion region{cfg.eps, cfg.A};
    const auto grid = intertwining_grid();
    for (int n = 1; n <= 3; ++n) {
        const std::string tag = "n=" + std::to_string(n);
        rec.guarded("intertwining " + tag, [&] {
            const auto circ = verify_intertwining(n, Flavor::circular, jets::cosh_lambda(1.3, true), grid);
            const auto hyp = verify_intertwining(
                n, Flavor::hyperbolic, jets::from_expr(euclid_heat_kernel(cfg.t, Flavor::hyperbolic), 2 * n + 2), grid);
            rec.below("intertwining circular star " + tag, circ.star, 1e-9);
            rec.below("intertwining circular shift " + tag, circ.shift, 1e-9);
            rec.below("intertwining hyperbolic star " + tag, hyp.star, 1e-9);
            rec.below("intertwining hyperbolic shift " + tag, hyp.shift, 1e-9);
        });
        rec.guarded("Dstar w = nu_2t " + tag, [&] {
            const SymExpr lhs = w_kernel(n, cfg.t).apply_L(n);
            const SymExpr rhs = unwrapped_heat_kernel(n, 2 * cfg.t);
            rec.truth("Dstar w = nu_2t " + tag, (lhs - rhs).near_zero(Scalar("1e-40"), rhs.max_abs_coeff()));
        });
        rec.guarded("shift on phi " + tag, [&] {
            double dt = 0.0, d = 0.0;
            for (const double lambda : {0.0, 1.0, 1.7}) {
                const SphericalEval phi(lambda, n, 2 * n);
                for (const auto& r : grid) {
                    const Complex a = apply_Dtilde_to_phi(lambda, n, r), b = std::cosh(lambda * r);
                    dt = std::max(dt, std::abs(a - b) / (1.0 + std::abs(b)));
                    const Complex c = apply_shift_D(phi.jet_real(), n, r, Flavor::hyperbolic), e = std::cos(lambda * r);
                    d = std::max(d, std::abs(c - e) / (1.0 + std::abs(e)));
                }
            }
            rec.below("Dtilde phi = cosh " + tag, dt, 1e-10);
            rec.below("D phi = cos " + tag, d, 1e-10);
        });
        rec.guarded("Df(0) " + tag, [&] {
            const auto g = jets::from_expr(euclid_heat_kernel(cfg.t, Flavor::hyperbolic), 2 * n);
            const Complex v = apply_shift_D(g, n, Complex{}, Flavor::hyperbolic);
            rec.below("Df(0) = f(0) " + tag, std::abs(v - g(Complex{}, 0)[0]), 1e-10);
        });
        rec.guarded("pole order " + tag, [&] {
            const SymExpr nu = unwrapped_heat_kernel(n, cfg.t);
            for (long m : {1L, 2L}) {
                const int order = pole_order_at(nu, m);
                rec.truth("pole order nu " + tag + " m=" + std::to_string(m), order == 2 * n - 1,
                          "order " + std::to_string(order));
            }
        });
        rec.guarded("derivative consistency " + tag, [&] {
            const SymExpr nu = unwrapped_heat_kernel(n, cfg.t);
            const SymExpr dnu = nu.differentiate();
            double worst = 0.0;
            const double h = 1e-5;
            for (const auto& z : random_region_points(rng, 50, region, 4.0 * kPi)) {
                const Complex fd = (nu.evaluate(z + h) - nu.evaluate(z - h)) / (2.0 * h);
                const Complex ex = dnu.evaluate(z);
                worst = std::max(worst, std::abs(fd - ex) / std::max(std::abs(ex), 1e-300));
            }
            rec.below("differentiate vs finite differences " + tag, worst, 1e-8);
        });
    }
}

inline void kernels_suite(const RunConfig& cfg, Recorder& rec) {
    for (int n = 1; n <= 3; ++n) {
        for (const double t : {0.5, 1.0}) {
            const std::string tag = "n=" + std::to_string(n) + " t=" + std::to_string(t).substr(0, 3);
            rec.guarded("masses " + tag, [&] {
                rec.below("hyperbolic mass " + tag, std::abs(hyperbolic_mass(n, t).value.real() - 1.0), 1e-8);
                rec.below("sphere mass " + tag, std::abs(sphere_mass(n, t).value.real() - 1.0), 1e-6);
            });
            if (n > 2) continue;
            rec.guarded("periodization " + tag, [&] {
                const auto ks = build_kernels({n, t}, 8);
                double worst = 0.0;
                for (int i = 0; i <= 40; ++i) {
                    const double r = 0.3 + (kPi - 0.6) * i / 40.0;
                    worst = std::max(worst, std::abs(periodize(ks.nu_t, r, 8) - ks.rho_t.evaluate(Complex(r, 0.0))));
                }
                rec.below("periodization " + tag, worst + ks.rho_t.tail_bound(), 1e-8);
            });
        }
    }
    rec.guarded("heat equation", [&] {
        const int n = cfg.n;
        const double t = cfg.t, h = 1e-3 * std::min(1.0, t);
        const SymExpr g = hyperbolic_heat_kernel(n, t);
        auto at = [&](double tt, double r) { return hyperbolic_heat_kernel(n, tt).evaluate(r); };
        const SymExpr lap = ops::radial_laplacian(n, Flavor::hyperbolic).apply(g);
        double worst = 0.0;
        for (const double r : {0.3, 0.8, 1.5, 2.5, 4.0}) {
            const Complex dt = (-at(t + 2 * h, r) + 8.0 * at(t + h, r) - 8.0 * at(t - h, r) + at(t - 2 * h, r)) / (12.0 * h);
            const Complex rhs = 0.5 * lap.evaluate(r);
            worst = std::max(worst, std::abs(dt - rhs) * t / std::abs(g.evaluate(r)));
        }
        rec.below("heat equation n=" + std::to_string(n), worst, 1e-7);
    });
}

inline void spectral_suite(const RunConfig& cfg, Recorder& rec) {
    for (int n = 0; n <= 3; ++n) {
        rec.guarded("calibration n=" + std::to_string(n), [&] {
            const auto c = calibrate_plancherel(n, {0.5, 1.0, 2.0});
            rec.below("calibration spread n=" + std::to_string(n), c.spread, 1e-8);
        });
    }
    for (int n = 1; n <= 2; ++n) {
        for (const double t : {0.5, 1.0}) {
            const std::string tag = "n=" + std::to_string(n) + " t=" + std::to_string(t).substr(0, 3);
            rec.guarded("semigroup " + tag, [&] {
                const SymExpr g = hyperbolic_heat_kernel(n, t);
                // gamma_t e^{(n+1) r} is bounded by its value at the peak of the Gaussian factor
                double M = 0.0;
                for (int i = 0; i <= 4000; ++i) {
                    const double r = i * 0.01;
                    M = std::max(M, std::abs(g.evaluate(r).real()) * std::exp((n + 1.0) * r));
                }
                const auto p = forward_transform([&](double r) { return g.evaluate(r).real(); },
                                                 DecayBound{1.01 * M, n + 1.0}, n, 8.0 / std::sqrt(t), 200);
                double worst = 0.0;
                for (std::size_t i = 0; i < p.size(); ++i) {
                    const double l = p.nodes()[i];
                    worst = std::max(worst, std::abs(p.values()[i] - std::exp(-t * (l * l + n * n) / 2.0)));
                }
                rec.below("forward gamma_t = multiplier " + tag, worst, 1e-7);
                const double norm2 = plancherel_norm(heat_multiplier(p.map([](double, Complex) { return 1.0; }), t));
                const double g2t = hyperbolic_heat_kernel(n, 2 * t).evaluate(0.0).real();
                rec.below("||gamma_t||^2 = gamma_2t(0) " + tag, std::abs(norm2 - g2t) / g2t, 1e-8);
            });
        }
    }
}

inline std::vector<SpectralProfile> family_profiles(int n, double t) {
    std::vector<SpectralProfile> out;
    for (const auto& m : standard_family()) out.push_back(make_profile(m, n, std::min(t, 0.5)));
    return out;
}

inline void isometry_suite(const RunConfig& cfg, Recorder& rec) {
    const auto lc = cfg.limits();
    const auto fam = standard_family();
    for (const auto& m : fam) {
        rec.guarded("isometry " + m.name, [&] {
            const auto p = make_profile(m, cfg.n, std::min(cfg.t, 0.5), cfg.lambda_max, cfg.lambda_count);
            const auto rep = isometry_limit(p, cfg.t, lc, cfg.tol);
            rec.below("isometry limit " + m.name, rep.residual, cfg.tol);
        });
    }
    rec.guarded("ibp", [&] {
        const auto p = make_profile(fam[0], cfg.n, std::min(cfg.t, 0.5), cfg.lambda_max, cfg.lambda_count);
        for (const auto& r : isometry_ibp(p, cfg.t, {2.0, 5.0, 8.0}, lc))
            rec.below("ibp reconstruction R=" + std::to_string(r.R.real()).substr(0, 3), r.residual(), 1e-8);
        std::vector<double> scaled;
        for (int j = 1; j <= 6; ++j) {
            const Complex R((j + 0.5) * kPi, cfg.im_offset);
            scaled.push_back(boundary_max(p, cfg.t, R) * R.real());
        }
        bool mono = true;
        for (std::size_t k = 1; k < scaled.size(); ++k) mono = mono && scaled[k] <= scaled[k - 1] * (1.0 + 1e-12);
        rec.truth("boundary max Re R non-increasing", mono);
    });
}

inline void inversion_suite(const RunConfig& cfg, Recorder& rec) {
    const auto lc = cfg.limits();
    for (const auto& m : standard_family()) {
        rec.guarded("inversion " + m.name, [&] {
            const auto p = make_profile(m, cfg.n, std::min(cfg.t, 0.5), cfg.lambda_max, cfg.lambda_count);
            const auto rep = inversion_limit(p, cfg.t, lc, cfg.tol);
            rec.below("inversion limit " + m.name, rep.residual, cfg.tol);
            const double g = general_inversion_rank1(p, cfg.t).value.real();
            rec.below("general inversion " + m.name, std::abs(g - rep.extrapolated.real()) / std::abs(rep.target),
                      1e-5);
        });
    }
}

inline void surjectivity_suite(const RunConfig& cfg, Recorder& rec) {
    const int n = cfg.n;
    const double t = cfg.t;
    const std::vector<double> eps{1.0, 1.0 / 2, 1.0 / 3, 1.0 / 4, 1.0 / 5, 1.0 / 6, 1.0 / 7, 1.0 / 8};
    SurjectivityOptions opt;
    opt.limits = cfg.limits();
    rec.guarded("surjectivity heat evolved", [&] {
        auto fhat = [](double l) { return std::exp(-l * l / 4.0); };
        const auto res = surjectivity_diagnostic(
            [&](double l) { return Complex(fhat(l) * std::exp(-t * (l * l + n * n) / 2.0), 0.0); }, n, t, eps, opt);
        rec.truth("heat evolved verdict finite", res.verdict == Verdict::finite, verdict_name(res.verdict));
        double worst = 0.0;
        for (std::size_t i = 0; i < res.recovered.size(); ++i)
            worst = std::max(worst, std::abs(res.recovered.values()[i] - fhat(res.recovered.nodes()[i])));
        rec.below("recovered fhat", res.verdict == Verdict::finite ? worst : INFINITY, 1e-6);
    });
    rec.guarded("surjectivity slow decay", [&] {
        const auto res = surjectivity_diagnostic(
            [&](double l) { return Complex(std::exp(-t * (l * l + n * n) / 4.0), 0.0); }, n, t,
            std::vector<double>(eps.begin(), eps.begin() + 6), opt);
        rec.truth("slow decay verdict divergent", res.verdict == Verdict::divergent, verdict_name(res.verdict));
    });
}

}  // namespace detail

inline SuiteReport run_suite(const std::string& name, const RunConfig& cfg) {
    cfg.validate();
    SuiteReport rep;
    rep.name = name;
    rep.config = cfg.to_json();
    detail::Recorder rec(rep);
    auto run_one = [&](const std::string& s) {
        if (s == "symbolic") detail::symbolic_suite(cfg, rec);
        else if (s == "kernels") detail::kernels_suite(cfg, rec);
        else if (s == "spectral") detail::spectral_suite(cfg, rec);
        else if (s == "isometry") detail::isometry_suite(cfg, rec);
        else if (s == "inversion") detail::inversion_suite(cfg, rec);
        else if (s == "surjectivity") detail::surjectivity_suite(cfg, rec);
        else throw ConfigError("unknown suite '" + s + "'");
    };
    if (name == "all") {
        for (const auto& s : suite_names()) run_one(s);
    } else {
        run_one(name);
    }
    return rep;
}

}  // namespace oddhyp::cli
