#include "oddhyp/kernels.hpp"
#include "oddhyp/spectral.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

using namespace oddhyp;

namespace {

using cd = std::complex<double>;

// Synthetic radial functions on H^3 with known transforms. For n = 1,
// f(r) = (C_1 / sinh r) (-G'(r)) where G(r) = int_R cos(lambda r) fhat(lambda) dlambda.
struct Synthetic {
    const char* name;
    std::function<double(double)> fhat;
    std::function<cd(cd)> G;  // entire, so G' comes from a complex step
};

std::vector<Synthetic> synthetic_family() {
    const double sp = std::sqrt(oracle::pi);
    return {
        {"gauss4", [](double l) { return std::exp(-l * l / 4); }, [sp](cd r) { return 2.0 * sp * std::exp(-r * r); }},
        {"gauss2", [](double l) { return std::exp(-l * l / 2); },
         [sp](cd r) { return std::sqrt(2.0) * sp * std::exp(-r * r / 2.0); }},
        {"quadratic", [](double l) { return l * l * std::exp(-l * l / 2); },
         [sp](cd r) { return std::sqrt(2.0) * sp * std::exp(-r * r / 2.0) * (1.0 - r * r); }},
        {"shifted2",
         [](double l) { return std::exp(-(l - 2) * (l - 2)) + std::exp(-(l + 2) * (l + 2)); },
         [sp](cd r) { return 2.0 * sp * std::cos(2.0 * r) * std::exp(-r * r / 4.0); }},
        {"shifted1",
         [](double l) { return 0.5 * (std::exp(-(l - 1) * (l - 1) / 2) + std::exp(-(l + 1) * (l + 1) / 2)); },
         [sp](cd r) { return std::sqrt(2.0) * sp * std::cos(r) * std::exp(-r * r / 2.0); }},
    };
}

constexpr double kC1 = 1.0 / (4.0 * oracle::pi * oracle::pi);

double synth_value(const Synthetic& s, double r) {
    const double rr = std::max(r, 1e-6);
    const double h = 1e-30;
    const double dG = s.G(cd(rr, h)).imag() / h;
    return kC1 * (-dG) / std::sinh(rr);
}

double fitted_M(const std::function<double(double)>& f, double alpha, double rmax) {
    double M = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double r = rmax * i / 4000.0;
        M = std::max(M, std::abs(f(r)) * std::exp(alpha * r));
    }
    return 1.01 * M;
}

}  // namespace

TEST(Density, PolynomialForm) {
    const SpectralDensity d{1, 2.0};
    EXPECT_DOUBLE_EQ(d(3.0), 18.0);
    EXPECT_DOUBLE_EQ(d(-3.0), d(3.0));
    const SpectralDensity d3{3, 1.0};
    EXPECT_DOUBLE_EQ(d3(2.0), 4.0 * 5.0 * 8.0);
}

TEST(Calibration, ClosedFormConstants) {
    EXPECT_NEAR(plancherel_constant(1), kC1, 1e-10 * kC1);
    EXPECT_NEAR(plancherel_constant(0), 1.0 / (2 * oracle::pi), 1e-10);
    for (int n = 1; n <= 3; ++n) {
        const double expect = 1.0 / (oracle::odd_double_factorial(n) * std::pow(2 * oracle::pi, n + 1));
        EXPECT_NEAR(plancherel_constant(n), expect, 1e-9 * expect) << "n=" << n;
    }
}

TEST(Calibration, GaussianMomentOracle) {
    for (double t : {0.5, 1.0, 2.0}) {
        const double lhs = kC1 * std::exp(-t / 2) * oracle::gaussian_moment(1, t);
        EXPECT_NEAR(lhs, std::real(oracle::gamma1(t, 0.0)), 1e-14);
        EXPECT_NEAR(lhs, std::exp(-t / 2) * std::pow(2 * oracle::pi * t, -1.5), 1e-14);
    }
}

TEST(Calibration, ConsistentAcrossTimes) {
    for (int n = 0; n <= 3; ++n) {
        const auto c = calibrate_plancherel(n, {0.5, 1.0, 2.0});
        EXPECT_LE(c.spread, 1e-8);
        EXPECT_EQ(c.per_t.size(), 3u);
    }
    EXPECT_THROW(calibrate_plancherel(2, {}), ConfigError);
}

TEST(Calibration, PlancherelCrossCheckForN2) {
    // ||gamma_t||^2 in radial coordinates against int e^{-t(lambda^2+4)} dmu.
    const double t = 0.6;
    const SymExpr g = hyperbolic_heat_kernel(2, t);
    const double direct = oracle::surface_area(2) * oracle::composite_gl(
        [&](double r) { return std::norm(g.evaluate(r)) * std::pow(std::sinh(r), 4); }, 0.0, 25.0, 100, 20);
    const double C2 = plancherel_constant(2);
    const double spectral = 2.0 * oracle::composite_gl(
        [&](double l) { return std::exp(-t * (l * l + 4)) * C2 * l * l * (l * l + 1); }, 0.0, 30.0, 60, 20);
    EXPECT_NEAR(direct, spectral, 1e-9 * direct);
}

TEST(Forward, HeatKernelGivesMultiplier) {
    for (int n = 1; n <= 2; ++n)
        for (double t : {0.5, 1.0}) {
            const SymExpr g = hyperbolic_heat_kernel(n, t);
            auto f = [&](double r) { return g.evaluate(r).real(); };
            double err = 0.0;
            const auto p = forward_transform(f, {fitted_M(f, n + 1.0, 40.0), n + 1.0}, n, 8.0 / std::sqrt(t), 120,
                                             {}, &err);
            EXPECT_LT(err, 1e-9);
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double l = p.nodes()[i];
                EXPECT_NEAR(p.values()[i].real(), std::exp(-t * (l * l + n * n) / 2), 1e-7);
            }
        }
}

TEST(Forward, ZeroFunction) {
    const auto p = forward_transform([](double) { return 0.0; }, {1.0, 2.0}, 1, 5.0, 20);
    for (auto v : p.values()) EXPECT_EQ(v, Complex(0.0, 0.0));
}

TEST(Forward, DecayViolation) {
    auto f = [](double r) { return std::exp(-1.5 * r); };
    EXPECT_THROW(forward_transform(f, {1.0, 2.0}, 1, 5.0, 20), DecayViolation);
    EXPECT_THROW(forward_transform(f, {1.0, 0.9}, 1, 5.0, 20), DecayViolation);
}

TEST(RoundTrip, SyntheticFamily) {
    for (const auto& s : synthetic_family()) {
        auto f = [&](double r) { return synth_value(s, r); };
        const double L = 14.0;
        const auto p = forward_transform(f, {fitted_M(f, 2.0, 40.0), 2.0}, 1, L, 160);
        double worst = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            worst = std::max(worst, std::abs(p.values()[i] - s.fhat(p.nodes()[i])));
        EXPECT_LE(worst, 1e-6) << s.name;
        // and back again
        for (double r : {0.0, 0.5, 1.5, 3.0}) {
            const auto inv = inverse_transform(p, r);
            EXPECT_NEAR(inv.value.real(), f(r), 1e-6 * std::max(1.0, std::abs(f(0.0)))) << s.name << " r=" << r;
            EXPECT_FALSE(inv.truncation_warning) << s.name;
        }
    }
}

TEST(Plancherel, SyntheticFamily) {
    for (const auto& s : synthetic_family()) {
        auto f = [&](double r) { return synth_value(s, r); };
        const double direct = oracle::surface_area(1) * oracle::composite_gl(
            [&](double r) { const double v = f(r); return v * v * std::sinh(r) * std::sinh(r); }, 0.0, 30.0, 120, 20);
        const auto p = SpectralProfile::from_function(1, plancherel_constant(1), 14.0,
                                                      [&](double l) { return Complex(s.fhat(l), 0.0); }, 400);
        EXPECT_NEAR(plancherel_norm(p), direct, 1e-6 * direct) << s.name;
    }
}

TEST(Inverse, TrapezoidOracle) {
    const auto p = SpectralProfile::from_function(1, plancherel_constant(1), 20.0,
                                                  [](double l) { return Complex(std::exp(-l * l / 4), 0.0); });
    const double r = 1.0;
    // 2000-point trapezoid rule for 2 int_0^20 phi fhat C_1 lambda^2 dlambda
    const int N = 2000;
    const double h = 20.0 / (N - 1);
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
        const double l = i * h;
        const double w = (i == 0 || i == N - 1) ? 0.5 * h : h;
        acc += w * oracle::phi1(l, r) * std::exp(-l * l / 4) * kC1 * l * l;
    }
    EXPECT_NEAR(inverse_transform(p, r).value.real(), 2.0 * acc, 1e-8);
}

TEST(Inverse, HeatKernelAtOrigin) {
    for (int n = 1; n <= 2; ++n) {
        const double t = 0.8;
        auto p = SpectralProfile::from_function(n, plancherel_constant(n), 8.0 / std::sqrt(t) + 6.0,
                                                [](double) { return Complex(1.0, 0.0); });
        p = heat_multiplier(p, t);
        EXPECT_NEAR(inverse_transform(p, 0.0).value.real(), hyperbolic_heat_kernel(n, t).evaluate(0.0).real(), 1e-10);
    }
}

TEST(Inverse, ZeroProfileAndTruncationWarning) {
    const auto zero = SpectralProfile::from_function(1, kC1, 5.0, [](double) { return Complex(0.0, 0.0); }, 50);
    EXPECT_EQ(inverse_transform(zero, 1.0).value, Complex(0.0, 0.0));
    EXPECT_FALSE(inverse_transform(zero, 1.0).truncation_warning);
    const auto flat = SpectralProfile::from_function(1, kC1, 5.0, [](double) { return Complex(1.0, 0.0); }, 50);
    EXPECT_TRUE(inverse_transform(flat, 1.0).truncation_warning);
}

TEST(HeatMultiplier, Properties) {
    const auto p = SpectralProfile::from_function(1, kC1, 10.0, [](double l) { return Complex(std::exp(-l * l / 4), 0.0); }, 64);
    const auto id = heat_multiplier(p, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(id.values()[i], p.values()[i]);
    const auto twice = heat_multiplier(heat_multiplier(p, 0.35), 0.35);
    const auto once = heat_multiplier(p, 0.7);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(std::abs(twice.values()[i] - once.values()[i]), 0.0, 1e-15);
    const auto ones = SpectralProfile(1, kC1, 2.0, {1.0}, {1.0}, {Complex(1.0, 0.0)});
    EXPECT_NEAR(heat_multiplier(ones, 1.0).values()[0].real(), std::exp(-1.0), 1e-15);
    EXPECT_THROW(heat_multiplier(p, -1.0), ConfigError);
}

TEST(Norms, Basics) {
    const auto zero = SpectralProfile::from_function(2, 1.0, 5.0, [](double) { return Complex(0.0, 0.0); }, 20);
    EXPECT_EQ(plancherel_norm(zero), 0.0);
    const auto p = SpectralProfile::from_function(2, plancherel_constant(2), 12.0,
                                                  [](double l) { return Complex(l * std::exp(-l * l / 3), 0.0); });
    EXPECT_EQ(sobolev_norm(p, 0.0), plancherel_norm(p));
    EXPECT_GT(sobolev_norm(p, 2.0), plancherel_norm(p));
}

TEST(Norms, HeatKernelSemigroup) {
    for (int n = 1; n <= 3; ++n)
        for (double t : {0.5, 1.0}) {
            auto p = SpectralProfile::from_function(n, plancherel_constant(n), 8.0 / std::sqrt(t) + 4.0,
                                                    [](double) { return Complex(1.0, 0.0); });
            const double norm2 = plancherel_norm(heat_multiplier(p, t));
            const double g2t = hyperbolic_heat_kernel(n, 2 * t).evaluate(0.0).real();
            EXPECT_NEAR(norm2, g2t, 1e-10 * g2t);
        }
}

TEST(Profile, ValidatesGrid) {
    EXPECT_THROW(SpectralProfile(1, 1.0, 1.0, {0.5, 0.2}, {1, 1}, {1.0, 1.0}), ConfigError);
    EXPECT_THROW(SpectralProfile(1, 1.0, 1.0, {0.5}, {1, 1}, {1.0}), ConfigError);
}

TEST(Csv, RoundTrip) {
    const auto path = (std::filesystem::temp_directory_path() / "oddhyp_profile_test.csv").string();
    const auto p = SpectralProfile::from_function(2, plancherel_constant(2), 9.0,
                                                  [](double l) { return Complex(std::exp(-l * l / 4), 0.1 * l); }, 80);
    write_profile_csv(p, path);
    const auto q = read_profile_csv(path);
    ASSERT_EQ(q.size(), p.size());
    EXPECT_EQ(q.n(), 2);
    EXPECT_DOUBLE_EQ(q.lambda_max(), 9.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        EXPECT_DOUBLE_EQ(q.nodes()[i], p.nodes()[i]);
        EXPECT_DOUBLE_EQ(q.weights()[i], p.weights()[i]);
        EXPECT_EQ(q.values()[i], p.values()[i]);
    }
    std::remove(path.c_str());
}

TEST(Csv, Errors) {
    EXPECT_THROW(read_profile_csv("/nonexistent/profile.csv"), IOError);
    const auto path = (std::filesystem::temp_directory_path() / "oddhyp_bad_profile.csv").string();
    {
        std::ofstream out(path);
        out << "n,C_n,lambda_max\n1,0.1,5\nlambda,re,im\n0.5,abc,0\n";
    }
    EXPECT_THROW(read_profile_csv(path), IOError);
    std::remove(path.c_str());
    EXPECT_THROW(write_profile_csv(SpectralProfile(), "/nonexistent/dir/out.csv"), IOError);
}
