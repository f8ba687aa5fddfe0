#pragma once

// Run configuration: defaults, key=value files and flag overrides.

#include "oddhyp/core/errors.hpp"
#include "oddhyp/core/scalar.hpp"
#include "oddhyp/limits.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <string>

namespace oddhyp::cli {

struct RunConfig {
    int n = 1;
    double t = 1.0;
    double eps = 0.3;
    double A = 1.0;
    double detour = 0.6;
    double lambda = 1.0;       // spectral parameter for spherheat
    double lambda_max = 0.0;   // 0: automatic
    int lambda_count = 400;
    int j_min = 2;
    int j_max = 8;
    double im_offset = 0.3;
    double rmax = 0.0;         // > 0 overrides j_max; also the kernel table range
    int count = 61;            // kernel table grid points
    bool complex_grid = false; // kernel table on Im r = im_offset
    double tol = 1e-4;
    std::string profile = "gauss";
    std::string flavor = "nu";
    std::string suite = "all";
    std::string out;
    std::uint64_t seed = 20240229;

    void validate() const {
        if (n < 0 || n > 6) throw ConfigError("n must lie in [0, 6]");
        if (!(t > 0)) throw ConfigError("t must be positive");
        if (!(eps > 0 && eps < detour && detour < A && A < kPi))
            throw ConfigError("need 0 < eps < detour < A < pi");
        if (!(tol > 0)) throw ConfigError("tol must be positive");
        if (lambda < 0) throw ConfigError("lambda must be nonnegative");
        if (lambda_max < 0) throw ConfigError("lambda-max must be nonnegative");
        if (count < 0) throw ConfigError("count must be nonnegative");
        if (lambda_count < 2) throw ConfigError("lambda-count must be at least 2");
        if (rmax < 0) throw ConfigError("rmax must be nonnegative");
    }

    int effective_j_max() const {
        if (rmax > 0) return static_cast<int>(std::floor(rmax / kPi - 0.5));
        return j_max;
    }

    /// Throws when the R sequence would hold fewer than two targets.
    LimitConfig limits() const {
        if (effective_j_max() < j_min + 1)
            throw ConfigError(rmax > 0 ? "rmax too small for the R sequence" : "need j_min < j_max");
        LimitConfig c;
        c.region = PoleRegion{eps, A};
        c.detour = detour;
        c.im_offset = im_offset;
        c.j_min = j_min;
        c.j_max = effective_j_max();
        return c;
    }

    void set(const std::string& key, const std::string& value) {
        auto num = [&](double& dst) {
            try {
                std::size_t used = 0;
                dst = std::stod(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
            } catch (const std::exception&) {
                throw ConfigError("bad number for " + key + ": " + value);
            }
        };
        auto integer = [&](auto& dst) {
            double v = 0;
            num(v);
            if (v != std::floor(v)) throw ConfigError("expected an integer for " + key);
            dst = static_cast<std::remove_reference_t<decltype(dst)>>(v);
        };
        if (key == "n") integer(n);
        else if (key == "t") num(t);
        else if (key == "eps" || key == "epsilon") num(eps);
        else if (key == "A") num(A);
        else if (key == "detour" || key == "detour_radius") num(detour);
        else if (key == "lambda") num(lambda);
        else if (key == "lambda_max" || key == "lambda-max") num(lambda_max);
        else if (key == "lambda_count" || key == "lambda-count") integer(lambda_count);
        else if (key == "j_min") integer(j_min);
        else if (key == "j_max") integer(j_max);
        else if (key == "im_offset") num(im_offset);
        else if (key == "rmax") num(rmax);
        else if (key == "tol") num(tol);
        else if (key == "count") integer(count);
        else if (key == "complex") complex_grid = (value == "1" || value == "true");
        else if (key == "profile") profile = value;
        else if (key == "flavor") flavor = value;
        else if (key == "suite") suite = value;
        else if (key == "out") out = value;
        else if (key == "seed") integer(seed);
        else throw ConfigError("unknown config key '" + key + "'");
    }

    /// Flat key=value lines; '#' starts a comment.
    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IOError("cannot open config " + path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r");
                const auto b = s.find_last_not_of(" \t\r");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["n"] = n;
        j["t"] = t;
        j["eps"] = eps;
        j["A"] = A;
        j["detour"] = detour;
        j["lambda"] = lambda;
        j["lambda_max"] = lambda_max;
        j["lambda_count"] = lambda_count;
        j["j_min"] = j_min;
        j["j_max"] = effective_j_max();
        j["im_offset"] = im_offset;
        j["rmax"] = rmax;
        j["tol"] = tol;
        j["count"] = count;
        j["complex"] = complex_grid;
        j["profile"] = profile;
        j["flavor"] = flavor;
        j["suite"] = suite;
        j["seed"] = seed;
        return j;
    }
};

}  // namespace oddhyp::cli
