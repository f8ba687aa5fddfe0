#pragma once

// The standard spectral test family used by the limit checks and the CLI.

#include "oddhyp/core/errors.hpp"
#include "oddhyp/spectral.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace oddhyp {

struct TestProfile {
    std::string name;
    std::function<double(double)> fhat;
};

inline std::vector<TestProfile> standard_family() {
    return {
        {"gauss", [](double l) { return std::exp(-l * l / 4.0); }},
        {"quadratic_gauss", [](double l) { return l * l * std::exp(-l * l / 2.0); }},
        {"smooth_step", [](double l) { return 0.5 * std::erfc((l - 3.0) / 0.3); }},
    };
}

inline TestProfile family_member(const std::string& name) {
    for (auto& p : standard_family())
        if (p.name == name) return p;
    throw ConfigError("unknown test profile '" + name + "'");
}

/// Lambda_max = max(8/sqrt(t_min), point where the |fhat| dmu tail drops below 1e-12).
inline double family_lambda_max(const TestProfile& p, int n, double t_min) {
    const SpectralDensity dens{n, 1.0};
    return choose_lambda_max([&](double l) { return std::abs(p.fhat(l)) * dens(l); }, 8.0 / std::sqrt(t_min), 1e-12);
}

inline SpectralProfile make_profile(const TestProfile& p, int n, double t_min, double lambda_max = 0.0,
                                    int count = 400) {
    const double L = lambda_max > 0 ? lambda_max : family_lambda_max(p, n, t_min);
    return SpectralProfile::from_function(n, plancherel_constant(n), L, [&](double l) { return Complex(p.fhat(l), 0.0); },
                                          count);
}

}  // namespace oddhyp
