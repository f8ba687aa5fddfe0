#include "oddhyp/family.hpp"
#include "oddhyp/kernels.hpp"
#include "oddhyp/limits.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace oddhyp;

namespace {

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

SpectralProfile gauss_profile(int n, double t = 0.5) { return make_profile(family_member("gauss"), n, t); }

}  // namespace

TEST(PoleRegion, Membership) {
    const PoleRegion reg{0.3, 1.0};
    EXPECT_TRUE(reg.contains(2.0));
    EXPECT_TRUE(reg.contains(Complex(kPi, 0.5)));
    EXPECT_FALSE(reg.contains(Complex(kPi + 0.1, 0.1)));
    EXPECT_FALSE(reg.contains(Complex(3.0, 1.2)));
    EXPECT_FALSE(reg.contains(-1.0));
    EXPECT_THROW((PoleRegion{0.5, 0.4}.validate()), ConfigError);
}

TEST(Contour, BelowFirstPole) {
    const auto p = build_contour(2.0, {0.3, 1.0}, 0.5);
    ASSERT_EQ(p.segments.size(), 1u);
    EXPECT_EQ(p.segments[0].kind, Segment::Kind::line);
    EXPECT_EQ(p.start(), Complex(0.0, 0.0));
    EXPECT_EQ(p.end(), Complex(2.0, 0.0));
}

TEST(Contour, OneArc) {
    const auto p = build_contour(5.0, {0.3, 1.0}, 0.5);
    ASSERT_EQ(p.segments.size(), 3u);
    EXPECT_NEAR(std::abs(p.segments[0].b - (kPi - 0.5)), 0.0, 1e-15);
    EXPECT_EQ(p.segments[1].kind, Segment::Kind::arc);
    EXPECT_NEAR(std::abs(p.segments[1].center - kPi), 0.0, 1e-15);
    EXPECT_NEAR(p.segments[1].point(0.5).imag(), 0.5, 1e-15);
    EXPECT_NEAR(std::abs(p.segments[2].a - (kPi + 0.5)), 0.0, 1e-15);
    EXPECT_EQ(p.end(), Complex(5.0, 0.0));
}

TEST(Contour, TwoArcs) {
    const auto p = build_contour(7.5, {0.3, 1.0}, 0.5);
    int arcs = 0;
    for (const auto& s : p.segments) arcs += s.kind == Segment::Kind::arc;
    EXPECT_EQ(arcs, 2);
    EXPECT_EQ(p.end(), Complex(7.5, 0.0));
    // consecutive pieces join up
    for (std::size_t k = 1; k < p.segments.size(); ++k)
        EXPECT_NEAR(std::abs(p.segments[k].a - p.segments[k - 1].b), 0.0, 1e-14);
}

TEST(Contour, InvalidTargets) {
    EXPECT_THROW(build_contour(Complex(kPi + 0.1, 0.0), {0.3, 1.0}, 0.5), InvalidTarget);
    EXPECT_THROW(build_contour(Complex(4.0, 1.5), {0.3, 1.0}, 0.5), InvalidTarget);
    EXPECT_THROW(build_contour(4.0, {0.3, 1.0}, 0.2), ConfigError);
}

TEST(ContourQuad, Trivial) {
    const auto p = build_contour(2.0, {0.3, 1.0}, 0.5);
    EXPECT_EQ(contour_quad([](Complex) { return Complex{}; }, p).value, Complex(0.0, 0.0));
    EXPECT_NEAR(std::abs(contour_quad([](Complex z) { return z; }, p).value - 2.0), 0.0, 1e-14);
    // an entire integrand does not see the detours
    const auto q = build_contour(Complex(7.5, 0.3), {0.3, 1.0}, 0.6);
    const Complex R(7.5, 0.3);
    EXPECT_LT(rel(contour_quad([](Complex z) { return z * z; }, q).value, R * R * R / 3.0), 1e-13);
}

TEST(SpherHeat, RankZeroAgainstErf) {
    for (double lambda : {0.0, 1.0, 2.0})
        for (double R : {1.0, 3.0, 6.0}) {
            const double t = 0.5;
            const auto v = spher_heat_integral(lambda, t, 0, ContourPath::straight(R)).value;
            EXPECT_LT(rel(v, oracle::cosh_gauss_integral(lambda, t, R)), 1e-12) << lambda << " " << R;
        }
}

TEST(SpherHeat, LimitAtLambdaOne) {
    const auto rep = spher_heat_limit_check(1.0, 0.5, 1);
    EXPECT_NEAR(rep.target, std::exp(1.0), 1e-15);
    EXPECT_LE(rep.residual, 1e-6);
    EXPECT_NEAR(rep.extrapolated.real(), 2.71828, 1e-5);
    EXPECT_EQ(rep.R_sequence.size(), 7u);
    EXPECT_TRUE(rep.passed());
}

TEST(SpherHeat, LimitAtLambdaZero) {
    const auto rep = spher_heat_limit_check(0.0, 1.0, 1);
    EXPECT_NEAR(rep.target, std::exp(1.0), 1e-15);
    EXPECT_LE(rep.residual, 1e-6);
}

TEST(SpherHeat, LimitGrid) {
    for (int n = 1; n <= 3; ++n)
        for (double lambda : {0.0, 1.0, 2.5})
            for (double t : {0.5, 1.0}) {
                const auto cfg = LimitConfig{}.extended_for(lambda, t);
                EXPECT_LE(spher_heat_limit_check(lambda, t, n, cfg).residual, 1e-5)
                    << "n=" << n << " lambda=" << lambda << " t=" << t;
            }
}

TEST(SpherHeat, PathIndependence) {
    const PoleRegion reg{0.3, 1.0};
    for (int n = 1; n <= 3; ++n)
        for (Complex R : {Complex(5.0, 0.0), Complex(7.5, 0.3), Complex(3.5 * kPi, -0.3)}) {
            const auto a = spher_heat_integral(1.3, 0.5, n, build_contour(R, reg, 0.4)).value;
            const auto b = spher_heat_integral(1.3, 0.5, n, build_contour(R, reg, 0.7)).value;
            EXPECT_LE(std::abs(a - b), 1e-9 * std::max(1.0, std::abs(a))) << "n=" << n << " R=" << R;
        }
}

TEST(SpherHeat, FixedRuleMatchesAdaptive) {
    const LimitConfig cfg;
    const auto targets = cfg.targets();
    const MultiTargetRule rule(targets, cfg.region, cfg.detour, cfg.panel);
    const InnerIntegrals inner(2, 0.5, rule);
    const auto s = inner(1.7);
    for (std::size_t j = 0; j < targets.size(); ++j) {
        const auto a = spher_heat_integral(1.7, 0.5, 2, rule.path(j)).value;
        EXPECT_LE(std::abs(s.value[j] - a), 1e-10 * std::abs(a));
    }
}

TEST(Orbital, OriginGivesEvolvedNorm) {
    for (int n = 1; n <= 2; ++n) {
        const auto p = gauss_profile(n);
        const double t = 0.7;
        const double expect = plancherel_norm(heat_multiplier(p, t));
        EXPECT_NEAR(orbital_integral(p, t, 0.0).real(), expect, 1e-13 * expect);
    }
}

TEST(Orbital, NarrowBumpConcentrates) {
    const int n = 1;
    const double l0 = 1.5, width = 1e-3, t = 0.5;
    const auto rule = QuadratureRule::gauss_legendre(120, l0 - 12 * width, l0 + 12 * width);
    const auto p = SpectralProfile::from_rule(n, plancherel_constant(n), l0 + 12 * width, rule, [&](double l) {
        return Complex(std::exp(-(l - l0) * (l - l0) / (2 * width * width)), 0.0);
    });
    const Complex norm = orbital_integral(p, t, 0.0);
    for (Complex r : {Complex(0.5, 0.0), Complex(2.0, 0.3), Complex(4.0, -0.2)})
        EXPECT_LT(rel(orbital_integral(p, t, r) / norm, phi_i(l0, n, r)), 1e-4);
}

TEST(Orbital, ZeroAndPole) {
    const auto p = gauss_profile(1).map([](double, Complex) { return Complex{}; });
    EXPECT_EQ(orbital_integral(p, 0.5, Complex(1.0, 0.2)), Complex(0.0, 0.0));
    EXPECT_THROW(orbital_integral(gauss_profile(1), 0.5, Complex(kPi, 1e-9)), PoleError);
}

TEST(Isometry, VanishesAtSmallR) {
    const auto p = gauss_profile(1);
    const double a = std::abs(isometry_I(p, 0.5, ContourPath::straight(1e-3)).value);
    const double b = std::abs(isometry_I(p, 0.5, ContourPath::straight(1e-4)).value);
    EXPECT_LT(a, 1e-6 * plancherel_norm(p));
    EXPECT_LT(b, a);
    EXPECT_EQ(isometry_I(p, 0.5, ContourPath::straight(0.0)).value, Complex(0.0, 0.0));
}

TEST(Isometry, DirectPolarFormAtRadiusOne) {
    const double t = 0.5;
    const auto p = gauss_profile(1, t);
    const Complex I = isometry_I(p, t, ContourPath::straight(1.0)).value;
    const double direct = oracle::isometry_direct_n1(t, 1.0);
    EXPECT_LE(std::abs(I - direct), 1e-6 * std::abs(direct));
}

TEST(Isometry, FiniteAtPolesForRankOne) {
    // for n = 1 the integrand has no poles, so I extends through pi and 2 pi
    const auto p = gauss_profile(1);
    for (double R : {kPi, 2 * kPi}) {
        const auto q = isometry_I(p, 0.5, ContourPath::straight(R));
        EXPECT_TRUE(std::isfinite(q.value.real()) && std::isfinite(q.value.imag()));
        const auto near = isometry_I(p, 0.5, build_contour(Complex(R, 0.31), {0.3, 1.0}, 0.6)).value;
        EXPECT_LT(std::abs(q.value - near), 0.5 * std::abs(near));
    }
}

TEST(Isometry, LimitOnFamily) {
    for (int n = 1; n <= 2; ++n)
        for (const auto& m : standard_family()) {
            const auto p = make_profile(m, n, 0.5);
            const auto rep = isometry_limit(p, 0.5);
            EXPECT_LE(rep.residual, 1e-4) << m.name << " n=" << n;
            EXPECT_EQ(rep.boundary_max.size(), rep.R_sequence.size());
        }
}

TEST(Isometry, PathIndependence) {
    const auto p = gauss_profile(2);
    const PoleRegion reg{0.3, 1.0};
    const Complex R(2.5 * kPi, 0.3);
    const auto a = isometry_I(p, 0.5, build_contour(R, reg, 0.4));
    const auto b = isometry_I(p, 0.5, build_contour(R, reg, 0.7));
    EXPECT_LE(std::abs(a.value - b.value), std::max(2.0 * (a.error + b.error), 1e-10 * std::abs(a.value)));
}

TEST(Ibp, Reconstruction) {
    for (int n = 1; n <= 2; ++n)
        for (double t : {0.5, 1.0}) {
            const auto p = gauss_profile(n);
            for (const auto& r : isometry_ibp(p, t, {2.0, 5.0, 8.0})) {
                EXPECT_LE(r.residual(), 1e-8) << "n=" << n << " R=" << r.R;
                EXPECT_EQ(r.boundary.size(), static_cast<std::size_t>(n));
            }
        }
    EXPECT_THROW(isometry_ibp(gauss_profile(1), 0.5, {Complex(kPi + 0.1, 0)}), PoleError);
}

TEST(Ibp, BoundaryDecays) {
    const auto p = gauss_profile(1);
    const double t = 1.0;
    const auto r = isometry_ibp(p, t, {2.0, 5.0});
    EXPECT_GT(std::abs(r[0].boundary[0]), std::abs(r[1].boundary[0]));
    for (int n = 1; n <= 2; ++n) {
        const auto q = gauss_profile(n);
        double prev = INFINITY;
        for (int j = 1; j <= 6; ++j) {
            const Complex R((j + 0.5) * kPi, 0.3);
            const double scaled = boundary_max(q, 0.5, R) * R.real();
            EXPECT_LE(scaled, prev * (1.0 + 1e-12)) << "n=" << n << " j=" << j;
            prev = scaled;
        }
    }
}

TEST(Ibp, PointwiseBoundaryBound) {
    for (int n = 1; n <= 2; ++n) {
        const auto fit = boundary_bound_fit(n, 0.5);
        EXPECT_TRUE(fit.passed()) << "n=" << n << " ratio " << fit.ratio();
        EXPECT_GT(fit.coarse, 0.0);
    }
}

TEST(Inversion, LimitOnFamily) {
    for (int n = 1; n <= 2; ++n)
        for (const auto& m : standard_family()) {
            const auto p = make_profile(m, n, 0.5);
            const auto rep = inversion_limit(p, 0.5);
            EXPECT_LE(rep.residual, 1e-4) << m.name << " n=" << n;
        }
}

TEST(Inversion, HeatKernelInput) {
    for (int n = 1; n <= 2; ++n) {
        const double s = 0.6, t = 0.5;
        const auto p = SpectralProfile::from_function(n, plancherel_constant(n), 8.0 / std::sqrt(s) + 10.0,
                                                      [&](double l) { return Complex(std::exp(-s * (l * l + n * n) / 2.0), 0.0); });
        const auto rep = inversion_limit(p, t);
        const double g0 = hyperbolic_heat_kernel(n, s).evaluate(0.0).real();
        EXPECT_LE(std::abs(rep.extrapolated.real() - g0), 1e-4 * g0) << "n=" << n;
    }
}

TEST(Inversion, ZeroProfile) {
    const auto p = gauss_profile(1).map([](double, Complex) { return Complex{}; });
    const auto paths = MultiTargetRule::contours_for(LimitConfig{}.targets(), {0.3, 1.0}, 0.6);
    for (auto v : inversion_J(p, 0.5, paths).values) EXPECT_EQ(v, Complex(0.0, 0.0));
    EXPECT_EQ(general_inversion_rank1(p, 0.5).value, Complex(0.0, 0.0));
}

TEST(Inversion, TimeHalving) {
    const auto p = gauss_profile(2);
    const double t = 0.8;
    const LimitConfig cfg;
    const auto paths = MultiTargetRule::contours_for(cfg.targets(), cfg.region, cfg.detour);
    const auto J = inversion_J(p, t, paths);
    // the same sum assembled by hand from the inner integral at t/2
    const MultiTargetRule rule(paths, cfg.panel);
    const InnerIntegrals inner(2, t / 2, rule);
    std::vector<Complex> manual(paths.size());
    for (auto i : detail::active_nodes(detail::inversion_mass(p), 1e-18)) {
        const double l = p.nodes()[i];
        const Complex c = p.mu_weight(i) * p.values()[i] * std::exp(-t * (l * l + 4.0) / 2.0);
        const auto s = inner(l);
        for (std::size_t j = 0; j < paths.size(); ++j) manual[j] += c * s.value[j];
    }
    for (std::size_t j = 0; j < paths.size(); ++j) EXPECT_LE(std::abs(J.values[j] - manual[j]), 1e-14 * std::abs(manual[j]));
    // and the bracket tends to e^{t(lambda^2+n^2)/2}
    EXPECT_LE(spher_heat_limit_check(1.0, t / 2, 2).residual, 1e-6);
}

TEST(GeneralInversion, GaussianIdentity) {
    for (double lambda : {0.0, 1.0, 3.0})
        for (double t : {0.5, 1.0}) {
            auto h = [&](double y) { return std::exp(lambda * y - y * y / (2 * t)) / std::sqrt(kTwoPi * t); };
            const double v = integrate_interval(h, -40.0, 40.0, {0.0, 1e-14, 4000}).value.real();
            EXPECT_NEAR(v, std::exp(t * lambda * lambda / 2), 1e-12 * std::exp(t * lambda * lambda / 2));
        }
}

TEST(GeneralInversion, MatchesInverseTransform) {
    for (int n = 1; n <= 2; ++n)
        for (const auto& m : standard_family()) {
            const auto p = make_profile(m, n, 0.5);
            const double g = general_inversion_rank1(p, 0.5).value.real();
            const double f0 = inverse_transform(p, 0.0).value.real();
            EXPECT_LE(std::abs(g - f0), 1e-6 * std::abs(f0)) << m.name << " n=" << n;
        }
}

TEST(Surjectivity, HeatEvolvedIsFinite) {
    const int n = 1;
    const double t = 0.5;
    auto fhat = [](double l) { return std::exp(-l * l / 4.0); };
    const auto res = surjectivity_diagnostic(
        [&](double l) { return Complex(fhat(l) * std::exp(-t * (l * l + n * n) / 2.0), 0.0); }, n, t,
        {1.0, 0.5, 1.0 / 3, 0.25, 0.2, 1.0 / 6, 1.0 / 7, 0.125});
    ASSERT_EQ(res.verdict, Verdict::finite);
    EXPECT_EQ(res.partial_sums.size(), 8u);
    for (std::size_t k = 1; k < res.partial_sums.size(); ++k) EXPECT_GE(res.partial_sums[k], res.partial_sums[k - 1] - 1e-9);
    for (std::size_t i = 0; i < res.recovered.size(); ++i)
        EXPECT_LE(std::abs(res.recovered.values()[i] - fhat(res.recovered.nodes()[i])), 1e-6);
}

TEST(Surjectivity, SlowDecayDiverges) {
    const int n = 1;
    const double t = 0.5;
    const std::vector<double> eps{1.0, 0.5, 1.0 / 3, 0.25, 0.2, 1.0 / 6};
    auto F = [&](double l) { return Complex(std::exp(-t * (l * l + n * n) / 4.0), 0.0); };
    const auto res = surjectivity_diagnostic(F, n, t, eps);
    EXPECT_EQ(res.verdict, Verdict::divergent);
    EXPECT_TRUE(res.recovered.size() == 0);
    SurjectivityOptions opt;
    opt.throw_on_divergence = true;
    EXPECT_THROW(surjectivity_diagnostic(F, n, t, eps, opt), DivergenceDetected);
}

TEST(Surjectivity, ZeroInput) {
    const auto res = surjectivity_diagnostic([](double) { return Complex{}; }, 1, 0.5, {1.0, 0.5, 0.25});
    EXPECT_EQ(res.verdict, Verdict::finite);
    for (auto v : res.recovered.values()) EXPECT_EQ(v, Complex(0.0, 0.0));
}

TEST(Surjectivity, BadCutoffs) {
    auto F = [](double) { return Complex{}; };
    EXPECT_THROW(surjectivity_diagnostic(F, 1, 0.5, {}), ConfigError);
    EXPECT_THROW(surjectivity_diagnostic(F, 1, 0.5, {0.5, 1.0}), ConfigError);
}

TEST(GaussSup, TrivialCase) {
    const auto fit = gauss_sup_bound_check(1.0, 0, {0.0}, {0.3, 1.0});
    EXPECT_TRUE(fit.passed());
    // the sup of |e^{-R^2/2}| over the strip is reached at R -> 0 with Im R = +-A
    EXPECT_GE(fit.coarse * 2.0, 1.0);
}

TEST(GaussSup, QuadraticWeight) {
    std::vector<double> lambdas;
    for (int l = 1; l <= 10; ++l) lambdas.push_back(l);
    const auto fit = gauss_sup_bound_check(1.0, 2, lambdas, {0.3, 1.0});
    EXPECT_TRUE(fit.finite);
    EXPECT_TRUE(fit.stable) << fit.ratio();
}

TEST(GaussSup, CompletedSquareMaximum) {
    // on the real axis e^{5R - R^2/2} R^2 peaks near R = 5 at about 25 e^{12.5}
    double sup = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double R = 10.0 * i / 20000;
        sup = std::max(sup, std::exp(5 * R - R * R / 2) * R * R);
    }
    EXPECT_NEAR(sup / (25.0 * std::exp(12.5)), 1.0, 0.1);
    const auto fit = gauss_sup_bound_check(1.0, 2, {5.0}, {0.3, 1.0});
    EXPECT_GE(fit.coarse * (1.0 + 25.0) * std::exp(12.5), 0.9 * sup);
    EXPECT_TRUE(fit.passed());
}

TEST(LimitConfig, Validation) {
    LimitConfig c;
    EXPECT_NO_THROW(c.validate());
    c.detour = 0.2;
    EXPECT_THROW(c.validate(), ConfigError);
    c = LimitConfig{};
    c.j_max = c.j_min;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_GE(LimitConfig{}.extended_for(10.0, 1.0).j_max, 8);
    EXPECT_GE((LimitConfig{}.extended_for(10.0, 1.0).j_max + 0.5) * kPi, 20.0);
}

TEST(Extrapolation, ExactForModel) {
    std::vector<Complex> R, v;
    for (int j = 2; j <= 5; ++j) {
        R.emplace_back((j + 0.5) * kPi, 0.3);
        v.push_back(3.0 + Complex(1.0, 2.0) / R.back());
    }
    EXPECT_NEAR(std::abs(extrapolate_limit(R, v) - 3.0), 0.0, 1e-14);
    LimitReport rep;
    rep.R_sequence = R;
    rep.values = {4.0, 3.5, 3.7, 3.9};
    rep.target = 3.0;
    EXPECT_THROW(finish_report(rep, 1e-10), NonConvergence);
}
