#pragma once

// CSV tables for plotting. First line echoes the config as "# config: {json}",
// then a header row, then data rows.

#include "oddhyp/cli/config.hpp"
#include "oddhyp/family.hpp"
#include "oddhyp/kernels.hpp"
#include "oddhyp/limits.hpp"
#include "oddhyp/spectral.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace oddhyp::cli {

inline std::string csv_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class CsvTable {
public:
    CsvTable(const RunConfig& cfg, std::vector<std::string> columns) : columns_(std::move(columns)) {
        config_ = cfg.to_json().dump();
    }

    void row(const std::vector<double>& v) {
        if (v.size() != columns_.size()) throw ConfigError("CsvTable: row width does not match header");
        rows_.push_back(v);
    }
    std::size_t rows() const { return rows_.size(); }

    std::string str() const {
        std::ostringstream os;
        os << "# config: " << config_ << "\r\n";
        for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
        os << "\r\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_number(r[i]);
            os << "\r\n";
        }
        return os.str();
    }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IOError("cannot write " + path);
        out << str();
        if (!out) throw IOError("write failed for " + path);
    }

private:
    std::string config_;
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

/// Kernel grid on [0, rmax] (default 3). For the pole-carrying flavors nu and w
/// points within 1e-3 of a nonzero multiple of pi are dropped.
inline CsvTable kernel_table(const RunConfig& cfg) {
    cfg.validate();
    const ModelParams p{cfg.n, cfg.t};
    p.validate();
    const double rmax = cfg.rmax > 0 ? cfg.rmax : 3.0;
    const double im = cfg.complex_grid ? cfg.im_offset : 0.0;
    std::function<Complex(Complex)> eval;
    bool poles = false;
    if (cfg.flavor == "nu") {
        const SymExpr e = unwrapped_heat_kernel(cfg.n, cfg.t);
        eval = [e](Complex r) { return e.evaluate(r); };
        poles = true;
    } else if (cfg.flavor == "w") {
        const SymExpr e = w_kernel(cfg.n, cfg.t);
        eval = [e](Complex r) { return e.evaluate(r); };
        poles = true;
    } else if (cfg.flavor == "gamma") {
        const SymExpr e = hyperbolic_heat_kernel(cfg.n, cfg.t);
        eval = [e](Complex r) { return e.evaluate(r); };
    } else if (cfg.flavor == "rho") {
        auto k = std::make_shared<SphereHeatKernel>(cfg.n, cfg.t, 8);
        eval = [k](Complex r) { return k->evaluate(r); };
    } else {
        throw ConfigError("unknown kernel flavor '" + cfg.flavor + "' (nu, gamma, rho, w)");
    }
    CsvTable tab(cfg, cfg.complex_grid ? std::vector<std::string>{"r_re", "r_im", "value_re", "value_im"}
                                       : std::vector<std::string>{"r", "value"});
    for (int i = 0; i < cfg.count; ++i) {
        const double x = cfg.count == 1 ? 0.0 : rmax * i / (cfg.count - 1);
        if (poles && im == 0.0) {
            const double m = std::round(x / kPi);
            if (m != 0.0 && std::abs(x - m * kPi) < 1e-3) continue;
        }
        const Complex r(x, im);
        const Complex v = eval(r);
        if (cfg.complex_grid) tab.row({r.real(), r.imag(), v.real(), v.imag()});
        else tab.row({x, v.real()});
    }
    return tab;
}

/// Spherical-heat limit along the R sequence with the running two-point
/// extrapolation and its relative distance to e^{t(lambda^2+n^2)}.
inline CsvTable convergence_table(const RunConfig& cfg) {
    cfg.validate();
    const auto rep = spher_heat_limit_check(cfg.lambda, cfg.t, cfg.n, cfg.limits(), cfg.tol);
    CsvTable tab(cfg, {"j", "R_re", "R_im", "value_re", "value_im", "extrapolated_re", "extrapolated_im", "residual"});
    for (std::size_t k = 0; k < rep.values.size(); ++k) {
        const std::vector<Complex> R(rep.R_sequence.begin(), rep.R_sequence.begin() + k + 1);
        const std::vector<Complex> v(rep.values.begin(), rep.values.begin() + k + 1);
        const Complex ex = extrapolate_limit(R, v);
        const double j = std::round(rep.R_sequence[k].real() / kPi - 0.5);
        tab.row({j, rep.R_sequence[k].real(), rep.R_sequence[k].imag(), rep.values[k].real(), rep.values[k].imag(),
                 ex.real(), ex.imag(), std::abs(ex - rep.target) / std::abs(rep.target)});
    }
    return tab;
}

/// The named test profile on its lambda grid with the heat-evolved values.
inline CsvTable profile_table(const RunConfig& cfg) {
    cfg.validate();
    const auto p = make_profile(family_member(cfg.profile), cfg.n, std::min(cfg.t, 0.5), cfg.lambda_max,
                                cfg.lambda_count);
    const auto h = heat_multiplier(p, cfg.t);
    const auto dens = p.density();
    CsvTable tab(cfg, {"lambda", "fhat_re", "fhat_im", "heat_re", "heat_im", "density"});
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double l = p.nodes()[i];
        tab.row({l, p.values()[i].real(), p.values()[i].imag(), h.values()[i].real(), h.values()[i].imag(), dens(l)});
    }
    return tab;
}

inline CsvTable make_table(const std::string& kind, const RunConfig& cfg) {
    if (kind == "kernel") return kernel_table(cfg);
    if (kind == "convergence") return convergence_table(cfg);
    if (kind == "profile") return profile_table(cfg);
    throw ConfigError("unknown table kind '" + kind + "' (convergence, kernel, profile)");
}

inline void emit_table(const std::string& kind, const RunConfig& cfg, const std::string& path) {
    make_table(kind, cfg).write(path);
}

}  // namespace oddhyp::cli
