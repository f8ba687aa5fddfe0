// oddhyp: command-line front end for the verification suites, limit checks and tables.
//
// Exit codes: 0 success, 1 a check failed or did not converge, 2 bad configuration,
// 3 file I/O.

#include "oddhyp/cli/config.hpp"
#include "oddhyp/cli/suites.hpp"
#include "oddhyp/cli/tables.hpp"
#include "oddhyp/family.hpp"
#include "oddhyp/kernels.hpp"
#include "oddhyp/limits.hpp"
#include "oddhyp/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <deque>
#include <fstream>
#include <iostream>
#include <string>

namespace {

using oddhyp::cli::RunConfig;
using ojson = nlohmann::ordered_json;

enum Exit { ok = 0, failed = 1, bad_config = 2, io = 3 };

// Flag values are kept as text and applied after the config file, so that
// flags override file entries.
struct Overrides {
    struct Entry {
        CLI::Option* opt;
        std::string key;
        std::string value;
    };
    std::deque<Entry> entries;
    std::string config_file;

    void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        auto& e = entries.emplace_back(Entry{nullptr, key, {}});
        e.opt = app->add_option(flag, e.value, help);
    }

    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_file.empty()) cfg.load(config_file);
        for (const auto& e : entries)
            if (e.opt->count() > 0) cfg.set(e.key, e.value);
        cfg.validate();
        return cfg;
    }
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config_file, "key=value config file");
    o.add(app, "--seed", "seed", "random seed");
    o.add(app, "--out", "out", "output path (stdout when absent)");
}

void add_model(CLI::App* app, Overrides& o) {
    o.add(app, "--n", "n", "half of (dimension - 1)");
    o.add(app, "--t", "t", "heat time");
}

void add_limit(CLI::App* app, Overrides& o) {
    add_model(app, o);
    o.add(app, "--eps", "eps", "pole exclusion radius");
    o.add(app, "--A", "A", "strip half width");
    o.add(app, "--detour", "detour", "contour detour radius");
    o.add(app, "--rmax", "rmax", "largest Re R in the sequence");
    o.add(app, "--tol", "tol", "relative tolerance");
}

void add_spectral(CLI::App* app, Overrides& o) {
    o.add(app, "--lambda-max", "lambda_max", "spectral cutoff (0 = automatic)");
    o.add(app, "--lambda-count", "lambda_count", "spectral grid size");
    o.add(app, "--profile", "profile", "test profile: gauss, quadratic_gauss, smooth_step");
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw oddhyp::IOError("cannot write " + out);
    f << text;
    if (!f) throw oddhyp::IOError("write failed for " + out);
}

int emit_report(const oddhyp::LimitReport& rep, const RunConfig& cfg) {
    ojson j = rep.to_json();
    j["passed"] = rep.passed();
    emit(j.dump(2) + "\n", cfg.out);
    if (!rep.passed())
        std::cerr << "residual " << rep.residual << " exceeds tolerance " << rep.tolerance << "\n";
    return rep.passed() ? ok : failed;
}

oddhyp::SymExpr named_expr(const std::string& kind, int n, double t) {
    if (kind == "nu") return oddhyp::unwrapped_heat_kernel(n, t);
    if (kind == "gamma") return oddhyp::hyperbolic_heat_kernel(n, t);
    if (kind == "w") return oddhyp::w_kernel(n, t);
    if (kind == "euclid") return oddhyp::euclid_heat_kernel(t);
    throw oddhyp::ConfigError("unknown expression '" + kind + "' (nu, gamma, w, euclid)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Segal-Bargmann transform checks on odd-dimensional hyperbolic spaces"};
    app.require_subcommand(1);

    Overrides o;
    int apply_L = 0;
    std::string in_path, table_kind;

    auto* kernel = app.add_subcommand("kernel", "tabulate a heat kernel");
    add_common(kernel, o);
    add_model(kernel, o);
    o.add(kernel, "--flavor", "flavor", "nu, gamma, rho or w");
    o.add(kernel, "--rmax", "rmax", "grid end (default 3)");
    o.add(kernel, "--count", "count", "grid points");
    o.add(kernel, "--im", "im_offset", "imaginary part of r with --complex");
    std::string emit_kind = "csv";
    kernel->add_option("--emit", emit_kind, "output format")->check(CLI::IsMember({"csv"}));
    bool complex_grid = false;
    kernel->add_flag("--complex", complex_grid, "complex r grid");

    auto* transform = app.add_subcommand("transform", "heat-evolve a spectral profile CSV");
    add_common(transform, o);
    transform->add_option("--in", in_path, "profile CSV")->required();
    o.add(transform, "--t", "t", "heat time");

    auto* isometry = app.add_subcommand("isometry", "limit of I(R) against the Plancherel norm");
    add_common(isometry, o);
    add_limit(isometry, o);
    add_spectral(isometry, o);

    auto* inversion = app.add_subcommand("inversion", "limit of J(R) against f(0)");
    add_common(inversion, o);
    add_limit(inversion, o);
    add_spectral(inversion, o);

    auto* spherheat = app.add_subcommand("spherheat", "spherical-function heat limit");
    add_common(spherheat, o);
    add_limit(spherheat, o);
    o.add(spherheat, "--lambda", "lambda", "spectral parameter");

    auto* suite = app.add_subcommand("suite", "run verification suites");
    add_common(suite, o);
    add_limit(suite, o);
    add_spectral(suite, o);
    o.add(suite, "--suite", "suite", "symbolic, kernels, spectral, isometry, inversion, surjectivity or all");

    auto* table = app.add_subcommand("table", "write a CSV table");
    add_common(table, o);
    add_limit(table, o);
    add_spectral(table, o);
    table->add_option("--kind", table_kind, "convergence, kernel or profile")->required();
    o.add(table, "--lambda", "lambda", "spectral parameter (convergence)");
    o.add(table, "--flavor", "flavor", "kernel flavor (kernel)");
    o.add(table, "--count", "count", "grid points (kernel)");

    auto* expr = app.add_subcommand("expr", "print a kernel expression as JSON");
    add_common(expr, o);
    add_model(expr, o);
    o.add(expr, "--flavor", "flavor", "nu, gamma, w or euclid");
    expr->add_option("--apply-L", apply_L, "number of L applications")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : bad_config;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        RunConfig cfg = o.resolve();

        if (sub == kernel) {
            cfg.complex_grid = complex_grid;
            emit(oddhyp::cli::kernel_table(cfg).str(), cfg.out);
            return ok;
        }
        if (sub == transform) {
            const auto p = oddhyp::read_profile_csv(in_path);
            const auto h = oddhyp::heat_multiplier(p, cfg.t);
            if (!cfg.out.empty()) oddhyp::write_profile_csv(h, cfg.out);
            const auto f0 = oddhyp::inverse_transform(h, 0.0);
            ojson j;
            j["n"] = p.n();
            j["t"] = cfg.t;
            j["points"] = p.size();
            j["norm_squared"] = oddhyp::plancherel_norm(p);
            j["evolved_norm_squared"] = oddhyp::plancherel_norm(h);
            j["evolved_at_origin"] = ojson::array({f0.value.real(), f0.value.imag()});
            j["tail_estimate"] = f0.tail_estimate;
            j["truncation_warning"] = f0.truncation_warning;
            std::cout << j.dump(2) << "\n";
            return ok;
        }
        if (sub == isometry || sub == inversion) {
            const auto p = oddhyp::make_profile(oddhyp::family_member(cfg.profile), cfg.n, std::min(cfg.t, 0.5),
                                                cfg.lambda_max, cfg.lambda_count);
            const auto rep = sub == isometry ? oddhyp::isometry_limit(p, cfg.t, cfg.limits(), cfg.tol)
                                             : oddhyp::inversion_limit(p, cfg.t, cfg.limits(), cfg.tol);
            return emit_report(rep, cfg);
        }
        if (sub == spherheat) {
            return emit_report(oddhyp::spher_heat_limit_check(cfg.lambda, cfg.t, cfg.n, cfg.limits(), cfg.tol), cfg);
        }
        if (sub == suite) {
            const auto rep = oddhyp::cli::run_suite(cfg.suite, cfg);
            emit(rep.to_json().dump(2) + "\n", cfg.out);
            for (const auto& c : rep.checks)
                if (!c.passed)
                    std::cerr << "FAIL " << c.name << ": " << c.value << " > " << c.tolerance
                              << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
            return rep.passed() ? ok : failed;
        }
        if (sub == table) {
            emit(oddhyp::cli::make_table(table_kind, cfg).str(), cfg.out);
            return ok;
        }
        if (sub == expr) {
            const std::string kind = cfg.flavor;
            oddhyp::SymExpr e = named_expr(kind, cfg.n, cfg.t);
            if (apply_L > 0) e = e.apply_L(apply_L);
            emit(e.to_json().dump(2) + "\n", cfg.out);
            return ok;
        }
    } catch (const oddhyp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return bad_config;
    } catch (const oddhyp::IOError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return io;
    } catch (const oddhyp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failed;
    }
    return ok;
}
