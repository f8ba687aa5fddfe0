#include "oddhyp/kernels.hpp"
#include "oddhyp/spherical.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace oddhyp;

namespace {

std::vector<Complex> region_points(std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> re(0.05, 3.0 * kPi), im(-0.95, 0.95);
    std::vector<Complex> out;
    while (static_cast<int>(out.size()) < count) {
        const Complex z(re(rng), im(rng));
        const double m = std::round(z.real() / kPi);
        if (m != 0 && std::abs(z - Complex(m * kPi, 0)) <= 0.3) continue;
        out.push_back(z);
    }
    return out;
}

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(PhiI, BaseCaseIsCosh) {
    for (double lambda : {0.0, 0.5, 2.5})
        for (const auto& z : region_points(1, 10)) EXPECT_LT(rel(phi_i(lambda, 0, z), std::cosh(lambda * z)), 1e-14);
}

TEST(PhiI, FirstLadderStepClosedForm) {
    for (double lambda : {0.7, 1.0, 3.0})
        for (const auto& z : region_points(2, 10)) {
            const Complex expect = std::sinh(lambda * z) / (lambda * z) * (z / std::sin(z));
            EXPECT_LT(rel(phi_i(lambda, 1, z), expect), 1e-13);
        }
}

TEST(PhiI, ValueAtHalfPi) { EXPECT_NEAR(phi_i(1.0, 1, kPi / 2).real(), std::sinh(kPi / 2), 1e-13); }

TEST(PhiI, NormalizedAtOrigin) {
    for (int k = 0; k <= 3; ++k)
        for (double lambda : {0.0, 1.0, 4.0}) {
            EXPECT_NEAR(phi_i(lambda, k, 0.0).real(), 1.0, 1e-14);
            EXPECT_NEAR(phi_i(lambda, k, 1e-5).real(), phi_i(lambda, k, -1e-5).real(), 1e-14);
        }
}

TEST(PhiI, EvenInRAndLambda) {
    for (int k = 1; k <= 3; ++k)
        for (const auto& z : region_points(3, 8)) {
            const Complex a = phi_i(1.3, k, z);
            EXPECT_LT(rel(phi_i(1.3, k, -z), a), 1e-12);
            EXPECT_LT(rel(phi_i(-1.3, k, z), a), 1e-12);
        }
}

TEST(PhiI, PoleGuard) { EXPECT_THROW(phi_i(1.0, 1, Complex(kPi + 1e-10, 0)), PoleError); }

TEST(PhiReal, BaseCaseIsCos) {
    for (double r : {0.0, 0.4, 2.0, 7.0}) EXPECT_NEAR(phi_real(1.7, 0, r), std::cos(1.7 * r), 1e-14);
}

TEST(PhiReal, FirstStepMatchesClosedFormAndOde) {
    for (double lambda : {0.0, 0.8, 2.0})
        for (double r : {0.5, 1.0, 3.0, 6.0}) {
            EXPECT_NEAR(phi_real(lambda, 1, r), oracle::phi1(lambda, r), 1e-13);
            EXPECT_NEAR(phi_real(lambda, 1, r), oracle::phi_ode(lambda, 1, r), 1e-8);
        }
}

TEST(PhiReal, HigherRankAgainstOde) {
    for (int k = 2; k <= 3; ++k)
        for (double lambda : {0.0, 1.0, 2.5})
            for (double r : {0.7, 2.0, 5.0}) {
                const double v = phi_real(lambda, k, r);
                EXPECT_NEAR(v, oracle::phi_ode(lambda, k, r), 1e-8) << "k=" << k << " lambda=" << lambda;
                EXPECT_LE(std::abs(v), 1.0 + 1e-12);
            }
}

TEST(Ladder, Constants) {
    EXPECT_DOUBLE_EQ(ladder_d(1.0, 0), 1.0);
    EXPECT_NEAR(ladder_c(1.0, 1), -1.0 / kTwoPi, 1e-15);
    EXPECT_NEAR(ladder_c(2.0, 2), 4.0 * 5.0 / 3.0 / (kTwoPi * kTwoPi), 1e-15);
    EXPECT_NEAR(ladder_c(2.0, 2), 0.168869, 1e-6);
    for (int n = 1; n <= 4; ++n) {
        double prod = 1.0;
        for (int k = 0; k < n; ++k) prod *= ladder_d(1.9, k);
        EXPECT_NEAR(ladder_c(1.9, n), prod / std::pow(-kTwoPi, n), 1e-14 * std::abs(prod));
    }
}

TEST(Ladder, StepConsistency) {
    for (int k = 0; k <= 2; ++k)
        for (double lambda : {0.5, 2.0}) {
            const SphericalEval ev(lambda, k, 1);
            for (const auto& z : region_points(4, 10)) {
                const Complex lhs = ev.phi_i_derivative(z, 1) / std::sin(z);
                EXPECT_LT(std::abs(lhs - ladder_d(lambda, k) * phi_i(lambda, k + 1, z)), 1e-10 * (1 + std::abs(lhs)));
            }
        }
}

TEST(Eigenfunction, CircularRadialLaplacian) {
    std::mt19937_64 rng(5);
    for (int k = 1; k <= 3; ++k)
        for (double lambda : {0.0, 1.0, 2.5}) {
            const SphericalEval ev(lambda, k, 2);
            for (const auto& z : region_points(6 + k, 30)) {
                const Complex lap = ev.phi_i_derivative(z, 2) + 2.0 * k * std::cos(z) / std::sin(z) * ev.phi_i_derivative(z, 1);
                const Complex rhs = (lambda * lambda + double(k) * k) * ev.phi_i(z);
                EXPECT_LE(std::abs(lap - rhs), 1e-8 * std::max(1.0, std::abs(rhs)));
            }
        }
}

TEST(Eigenfunction, HyperbolicRadialLaplacian) {
    for (int k = 1; k <= 3; ++k)
        for (double lambda : {0.0, 1.0, 2.5}) {
            const SphericalEval ev(lambda, k, 2);
            for (double r : {0.3, 1.0, 2.2, 4.0}) {
                const Complex lap = ev.phi_real_derivative(r, 2) +
                                    2.0 * k * std::cosh(r) / std::sinh(r) * ev.phi_real_derivative(r, 1);
                const double rhs = -(lambda * lambda + double(k) * k) * ev.phi_real(r);
                EXPECT_LE(std::abs(lap - rhs), 1e-8 * std::max(1.0, std::abs(rhs)));
            }
        }
}

TEST(Dtilde, MapsPhiToCosh) {
    for (const auto& z : region_points(8, 10)) {
        EXPECT_LT(rel(apply_Dtilde_to_phi(1.0, 1, z), std::cosh(z)), 1e-12);
        EXPECT_NEAR(apply_Dtilde_to_phi(0.0, 1, z).real(), 1.0, 1e-12);
    }
    EXPECT_LE(std::abs(apply_Dtilde_to_phi(1.7, 2, 2.1) - std::cosh(1.7 * 2.1)), 1e-10);
    for (int n = 1; n <= 3; ++n)
        for (const auto& z : intertwining_grid())
            EXPECT_LE(std::abs(apply_Dtilde_to_phi(2.3, n, z) - std::cosh(2.3 * z)), 1e-10 * (1 + std::abs(std::cosh(2.3 * z))));
}

TEST(DtildeStar, MapsCoshToPhi) {
    for (const auto& z : region_points(9, 10)) {
        const Complex direct = -1.0 / kTwoPi * 1.5 * std::sinh(1.5 * z) / std::sin(z);
        EXPECT_LT(rel(apply_Dtilde_star_to_cosh(1.5, 1, z), direct), 1e-12);
        EXPECT_LT(rel(apply_Dtilde_star_to_cosh(1.5, 1, z), ladder_c(1.5, 1) * phi_i(1.5, 1, z)), 1e-12);
    }
    EXPECT_EQ(ladder_c(0.0, 1), 0.0);
    EXPECT_EQ(apply_Dtilde_star_to_cosh(0.0, 1, Complex(1.0, 0.2)), Complex(0.0, 0.0));
    EXPECT_LE(std::abs(apply_Dtilde_star_to_cosh(1.0, 2, 1.3) - ladder_c(1.0, 2) * phi_i(1.0, 2, 1.3)), 1e-10);
    for (const auto& z : region_points(10, 5))
        EXPECT_LT(rel(apply_Dtilde_star_to_cosh(2.0, 2, z), ladder_c(2.0, 2) * phi_i(2.0, 2, z)), 1e-10);
}

TEST(Estimates, RightSideDirectSubstitution) {
    EXPECT_NEAR(estimate_rhs(1.0, 1.0, 0, 1, 1.0), 2.0 * (std::exp(1.0) - 1.0), 1e-14);
    EXPECT_NEAR(estimate_rhs(0.0, 2.0, 0, 1, 1.0), 3.0, 1e-14);
}

TEST(Estimates, FittedConstantsFiniteAndStable) {
    for (int n = 1; n <= 3; ++n) {
        const auto fit = fit_phi_estimate(n);
        EXPECT_TRUE(fit.finite) << "n=" << n;
        EXPECT_TRUE(fit.stable) << "n=" << n << " ratio " << fit.max_ratio();
        EXPECT_EQ(fit.constant_coarse.size(), 10u);
    }
}

TEST(Estimates, LargeAndSmallLambdaForms) {
    for (int n = 1; n <= 2; ++n) {
        const auto big = fit_phi_estimate_big(n);
        const auto small = fit_phi_estimate_small(n);
        EXPECT_TRUE(big.finite && big.stable) << "n=" << n << " ratio " << big.max_ratio();
        EXPECT_TRUE(small.finite && small.stable) << "n=" << n << " ratio " << small.max_ratio();
    }
}

TEST(RegionSample, PointsAvoidPoles) {
    for (const auto& z : region_sample(0.3, 1.0, 0.05, 4 * kPi, 3)) {
        EXPECT_LT(std::abs(z.imag()), 1.0);
        for (int m = 1; m <= 4; ++m) EXPECT_GT(std::abs(z - Complex(m * kPi, 0)), 0.3);
    }
}
