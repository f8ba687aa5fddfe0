#pragma once

// Symbolic expressions of the form
//
//     sum_i  a_i * exp(-g_i r^2) * r^{p_i} * S(r)^{q_i} * C(r)^{c_i}
//
// with (S, C) = (sin, cos) for the circular flavor and (sinh, cosh) for the
// hyperbolic one. The class is closed under d/dr and under
// L = -(1/2pi) S(r)^{-1} d/dr. In canonical form C appears at most to the first
// power (C^2 is rewritten as 1 -+ S^2), which makes distinct keys linearly
// independent: an expression is identically zero iff it has no terms.

#include "oddhyp/core/errors.hpp"
#include "oddhyp/core/scalar.hpp"
#include "oddhyp/core/series.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace oddhyp {

enum class Flavor { circular, hyperbolic };

inline const char* flavor_name(Flavor f) { return f == Flavor::circular ? "circular" : "hyperbolic"; }

inline Flavor parse_flavor(const std::string& s) {
    if (s == "circular") return Flavor::circular;
    if (s == "hyperbolic") return Flavor::hyperbolic;
    throw Error("unknown flavor: " + s);
}

struct SymTerm {
    Scalar coeff = 0;
    Scalar gauss_rate = 0;
    int r_power = 0;
    int s_power = 0;
    int c_power = 0;

    auto key() const { return std::tie(gauss_rate, r_power, s_power, c_power); }
};

struct EvalOptions {
    double pole_guard = 1e-8;
    double series_radius = 0.5;
    int series_order = 60;
};

/// Laurent expansion at r = 0: sum_k coeffs[k] r^{k + offset}.
struct LaurentSeries {
    int offset = 0;
    PowerSeries coeffs;
    std::vector<Scalar> magnitude;  // sum of |term contributions|, for cancellation tests

    /// True when every negative power cancels to working precision.
    bool regular() const {
        for (int k = 0; k < -offset && k <= static_cast<int>(coeffs.order()); ++k) {
            const Scalar a = boost::multiprecision::abs(coeffs[k]);
            if (a > Scalar("1e-30") * magnitude[k]) return false;
        }
        return true;
    }

    /// Taylor part (powers r^0 .. r^order) assuming regular().
    PowerSeries taylor() const {
        const int start = -offset;
        const int len = static_cast<int>(coeffs.order()) - start;
        PowerSeries out(std::max(len, 0));
        for (int k = 0; k <= len; ++k) out[k] = coeffs[k + start];
        return out;
    }
};

class SymExpr {
public:
    explicit SymExpr(Flavor flavor = Flavor::circular) : flavor_(flavor) {}

    SymExpr(Flavor flavor, std::vector<SymTerm> terms) : flavor_(flavor), terms_(std::move(terms)) {
        canonicalize();
    }

    // ---- builders -------------------------------------------------------------

    static SymExpr constant(const Scalar& a, Flavor f = Flavor::circular) {
        return SymExpr(f, {SymTerm{a, 0, 0, 0, 0}});
    }
    static SymExpr monomial(const Scalar& a, const Scalar& gauss_rate, int p, int q, int c,
                            Flavor f = Flavor::circular) {
        return SymExpr(f, {SymTerm{a, gauss_rate, p, q, c}});
    }
    /// a * exp(-rate r^2).
    static SymExpr gaussian(const Scalar& a, const Scalar& rate, Flavor f = Flavor::circular) {
        return monomial(a, rate, 0, 0, 0, f);
    }
    static SymExpr sin_pow(int q, Flavor f = Flavor::circular) { return monomial(1, 0, 0, q, 0, f); }
    static SymExpr cos_pow(int c, Flavor f = Flavor::circular) { return monomial(1, 0, 0, 0, c, f); }
    static SymExpr r_pow(int p, Flavor f = Flavor::circular) { return monomial(1, 0, p, 0, 0, f); }

    // ---- inspection -----------------------------------------------------------

    Flavor flavor() const { return flavor_; }
    const std::vector<SymTerm>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    int min_s_power() const {
        int m = 0;
        for (const auto& t : terms_) m = std::min(m, t.s_power);
        return m;
    }

    bool is_even() const {
        return std::all_of(terms_.begin(), terms_.end(),
                           [](const SymTerm& t) { return (t.r_power + t.s_power) % 2 == 0; });
    }

    /// Same flavor and identical canonical terms.
    bool equals(const SymExpr& other) const {
        if (flavor_ != other.flavor_ || terms_.size() != other.terms_.size()) return false;
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            if (terms_[i].key() != other.terms_[i].key() || terms_[i].coeff != other.terms_[i].coeff)
                return false;
        }
        return true;
    }

    /// Zero up to a relative coefficient tolerance (for products of numerically bound constants).
    bool near_zero(const Scalar& rel, const Scalar& scale) const {
        for (const auto& t : terms_)
            if (boost::multiprecision::abs(t.coeff) > rel * scale) return false;
        return true;
    }

    Scalar max_abs_coeff() const {
        Scalar m = 0;
        for (const auto& t : terms_) m = std::max(m, Scalar(boost::multiprecision::abs(t.coeff)));
        return m;
    }

    // ---- algebra --------------------------------------------------------------

    friend SymExpr operator+(const SymExpr& a, const SymExpr& b) {
        check_flavor(a, b);
        std::vector<SymTerm> terms = a.terms_;
        terms.insert(terms.end(), b.terms_.begin(), b.terms_.end());
        return SymExpr(a.flavor_, std::move(terms));
    }

    friend SymExpr operator-(const SymExpr& a, const SymExpr& b) { return a + b * Scalar(-1); }

    friend SymExpr operator*(const SymExpr& a, const Scalar& s) {
        std::vector<SymTerm> terms = a.terms_;
        for (auto& t : terms) t.coeff *= s;
        return SymExpr(a.flavor_, std::move(terms));
    }
    friend SymExpr operator*(const Scalar& s, const SymExpr& a) { return a * s; }

    friend SymExpr operator*(const SymExpr& a, const SymExpr& b) {
        check_flavor(a, b);
        std::vector<SymTerm> terms;
        terms.reserve(a.terms_.size() * b.terms_.size());
        for (const auto& x : a.terms_)
            for (const auto& y : b.terms_)
                terms.push_back(SymTerm{x.coeff * y.coeff, x.gauss_rate + y.gauss_rate, x.r_power + y.r_power,
                                        x.s_power + y.s_power, x.c_power + y.c_power});
        return SymExpr(a.flavor_, std::move(terms));
    }

    /// Multiply by S(r)^k.
    SymExpr times_sin_pow(int k) const {
        std::vector<SymTerm> terms = terms_;
        for (auto& t : terms) t.s_power += k;
        return SymExpr(flavor_, std::move(terms));
    }

    /// Multiply by r^k (k >= 0).
    SymExpr times_r_pow(int k) const {
        std::vector<SymTerm> terms = terms_;
        for (auto& t : terms) t.r_power += k;
        return SymExpr(flavor_, std::move(terms));
    }

    SymExpr differentiate() const {
        std::vector<SymTerm> out;
        out.reserve(4 * terms_.size());
        const int csign = flavor_ == Flavor::circular ? -1 : 1;  // C' = csign * S
        for (const auto& t : terms_) {
            if (t.gauss_rate != 0)
                out.push_back({-2 * t.gauss_rate * t.coeff, t.gauss_rate, t.r_power + 1, t.s_power, t.c_power});
            if (t.r_power != 0)
                out.push_back({t.coeff * t.r_power, t.gauss_rate, t.r_power - 1, t.s_power, t.c_power});
            if (t.s_power != 0)
                out.push_back({t.coeff * t.s_power, t.gauss_rate, t.r_power, t.s_power - 1, t.c_power + 1});
            if (t.c_power != 0)
                out.push_back(
                    {t.coeff * t.c_power * csign, t.gauss_rate, t.r_power, t.s_power + 1, t.c_power - 1});
        }
        return SymExpr(flavor_, std::move(out));
    }

    /// L e = -(1/2pi) S(r)^{-1} de/dr.
    SymExpr apply_L() const { return differentiate().times_sin_pow(-1) * (Scalar(-1) / two_pi_scalar()); }

    SymExpr apply_L(int times) const {
        SymExpr e = *this;
        for (int i = 0; i < times; ++i) e = e.apply_L();
        return e;
    }

    // ---- evaluation -----------------------------------------------------------

    /// Distance from r to the nearest zero of S (m pi or i m pi), and that m.
    std::pair<double, long> nearest_zero(Complex r) const {
        if (flavor_ == Flavor::circular) {
            const long m = std::lround(r.real() / kPi);
            return {std::abs(r - Complex(m * kPi, 0.0)), m};
        }
        const long m = std::lround(r.imag() / kPi);
        return {std::abs(r - Complex(0.0, m * kPi)), m};
    }

    Complex evaluate(Complex r, const EvalOptions& opt = {}) const {
        if (terms_.empty()) return Complex(0.0, 0.0);
        const auto& cache = this->cache();
        if (cache.has_negative_s) {
            const auto [dist, m] = nearest_zero(r);
            if (m == 0 && std::abs(r) < opt.series_radius) {
                const auto& ser = series_cache(opt);
                if (ser.regular) return ser.taylor.evaluate(r);
            }
            if (dist < opt.pole_guard)
                throw PoleError("SymExpr::evaluate: r within pole guard of a zero of " +
                                std::string(flavor_ == Flavor::circular ? "sin" : "sinh"));
        }
        return evaluate_direct(r);
    }

    double evaluate_real(double r, const EvalOptions& opt = {}) const { return evaluate(Complex(r, 0.0), opt).real(); }

    /// Plain term-by-term evaluation without pole handling.
    Complex evaluate_direct(Complex r) const {
        const auto& cache = this->cache();
        Complex s, c;
        if (flavor_ == Flavor::circular) {
            s = std::sin(r);
            c = std::cos(r);
        } else {
            s = std::sinh(r);
            c = std::cosh(r);
        }
        const Complex r2 = r * r;
        std::vector<Complex> gauss(cache.rates.size());
        for (std::size_t i = 0; i < cache.rates.size(); ++i)
            gauss[i] = cache.rates[i] == 0.0 ? Complex(1.0, 0.0) : std::exp(-cache.rates[i] * r2);
        Complex acc(0.0, 0.0);
        for (const auto& t : cache.compiled) {
            Complex v = t.coeff * gauss[t.rate_index];
            if (t.p) v *= ipow(r, t.p);
            if (t.q) v *= ipow(s, t.q);
            if (t.c) v *= c;
            acc += v;
        }
        return acc;
    }

    /// Laurent series at r = 0 through total power `order` (relative to r^0).
    LaurentSeries laurent_at_zero(int order) const {
        LaurentSeries out;
        int offset = 0;
        for (const auto& t : terms_) offset = std::min(offset, t.r_power + t.s_power);
        out.offset = offset;
        const std::size_t len = static_cast<std::size_t>(order - offset);
        out.coeffs = PowerSeries(len);
        out.magnitude.assign(len + 1, Scalar(0));
        const bool hyp = flavor_ == Flavor::hyperbolic;
        const PowerSeries sinc = series::sinc(len, hyp);
        const PowerSeries cosine = series::cosine(len, hyp);
        std::map<int, PowerSeries> sinc_pows;
        std::map<Scalar, PowerSeries> gaussians;
        for (const auto& t : terms_) {
            auto it = sinc_pows.find(t.s_power);
            if (it == sinc_pows.end()) it = sinc_pows.emplace(t.s_power, sinc.pow(t.s_power)).first;
            PowerSeries term = it->second;
            if (t.c_power) term = term * cosine.pow(t.c_power);
            if (t.gauss_rate != 0) {
                auto g = gaussians.find(t.gauss_rate);
                if (g == gaussians.end()) g = gaussians.emplace(t.gauss_rate, series::gaussian(len, t.gauss_rate)).first;
                term = term * g->second;
            }
            const int shift = t.r_power + t.s_power - offset;
            for (std::size_t k = 0; k + shift <= len; ++k) {
                const Scalar v = t.coeff * term[k];
                out.coeffs[k + shift] += v;
                out.magnitude[k + shift] += boost::multiprecision::abs(v);
            }
        }
        return out;
    }

    // ---- text / JSON ----------------------------------------------------------

    std::string to_string() const {
        if (terms_.empty()) return "0";
        const char* s = flavor_ == Flavor::circular ? "sin" : "sinh";
        const char* c = flavor_ == Flavor::circular ? "cos" : "cosh";
        std::ostringstream os;
        os.precision(12);
        bool first = true;
        for (const auto& t : terms_) {
            if (!first) os << " + ";
            first = false;
            os << "(" << to_double(t.coeff) << ")";
            if (t.gauss_rate != 0) os << "*exp(-" << to_double(t.gauss_rate) << "*r^2)";
            if (t.r_power) os << "*r^" << t.r_power;
            if (t.s_power) os << "*" << s << "^" << t.s_power;
            if (t.c_power) os << "*" << c << "^" << t.c_power;
        }
        return os.str();
    }

    nlohmann::ordered_json to_json() const {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& t : terms_) {
            nlohmann::ordered_json j;
            j["coeff"] = t.coeff.str(40, std::ios_base::scientific);
            j["gauss_rate"] = to_double(t.gauss_rate);
            j["r_power"] = t.r_power;
            j["s_power"] = t.s_power;
            j["c_power"] = t.c_power;
            j["flavor"] = flavor_name(flavor_);
            arr.push_back(std::move(j));
        }
        return arr;
    }

    /// Parses the array form written by to_json. An empty array needs `fallback` for its flavor.
    static SymExpr from_json(const nlohmann::json& j, Flavor fallback = Flavor::circular) {
        if (!j.is_array()) throw Error("SymExpr::from_json: expected an array of terms");
        std::vector<SymTerm> terms;
        Flavor flavor = fallback;
        bool have_flavor = false;
        for (const auto& item : j) {
            SymTerm t;
            const auto& coeff = item.at("coeff");
            t.coeff = coeff.is_string() ? Scalar(coeff.get<std::string>()) : Scalar(coeff.get<double>());
            const auto& rate = item.at("gauss_rate");
            t.gauss_rate = rate.is_string() ? Scalar(rate.get<std::string>()) : Scalar(rate.get<double>());
            t.r_power = item.at("r_power").get<int>();
            t.s_power = item.at("s_power").get<int>();
            t.c_power = item.at("c_power").get<int>();
            if (t.r_power < 0 || t.c_power < 0 || t.gauss_rate < 0)
                throw Error("SymExpr::from_json: r_power, c_power and gauss_rate must be nonnegative");
            const Flavor f = parse_flavor(item.at("flavor").get<std::string>());
            if (have_flavor && f != flavor) throw FlavorMismatch("SymExpr::from_json: mixed flavors");
            flavor = f;
            have_flavor = true;
            terms.push_back(t);
        }
        return SymExpr(flavor, std::move(terms));
    }

private:
    struct CompiledTerm {
        double coeff;
        std::size_t rate_index;
        int p, q, c;
    };
    struct SeriesCache {
        std::once_flag once;
        bool regular = false;
        PowerSeries taylor;
    };
    struct Cache {
        std::vector<double> rates;
        std::vector<CompiledTerm> compiled;
        bool has_negative_s = false;
    };
    struct Lazy {
        std::once_flag once;
        std::unique_ptr<Cache> data;
        SeriesCache series;
    };

    static void check_flavor(const SymExpr& a, const SymExpr& b) {
        if (a.flavor_ != b.flavor_) throw FlavorMismatch("SymExpr: circular and hyperbolic expressions mixed");
    }

    void canonicalize() {
        // Reduce C^c to C^{c mod 2} using C^2 = 1 - S^2 (circular) or 1 + S^2 (hyperbolic).
        const int sgn = flavor_ == Flavor::circular ? -1 : 1;
        std::map<std::tuple<Scalar, int, int, int>, Scalar> acc;
        for (const auto& t : terms_) {
            if (t.c_power < 0 || t.r_power < 0 || t.gauss_rate < 0)
                throw Error("SymExpr: r_power, c_power and gauss_rate must be nonnegative");
            const int half = t.c_power / 2;
            const int crem = t.c_power % 2;
            // (1 + sgn S^2)^half = sum_i binom(half, i) sgn^i S^{2i}
            for (int i = 0; i <= half; ++i) {
                Scalar coeff = t.coeff * binomial(half, i);
                if (sgn < 0 && (i % 2 == 1)) coeff = -coeff;
                acc[{t.gauss_rate, t.r_power, t.s_power + 2 * i, crem}] += coeff;
            }
        }
        terms_.clear();
        for (const auto& [k, v] : acc) {
            if (v == 0) continue;
            terms_.push_back(SymTerm{v, std::get<0>(k), std::get<1>(k), std::get<2>(k), std::get<3>(k)});
        }
        lazy_ = std::make_shared<Lazy>();
    }

    const Cache& cache() const {
        std::call_once(lazy_->once, [this] {
            auto c = std::make_unique<Cache>();
            for (const auto& t : terms_) {
                const double rate = to_double(t.gauss_rate);
                auto it = std::find(c->rates.begin(), c->rates.end(), rate);
                std::size_t idx = static_cast<std::size_t>(it - c->rates.begin());
                if (it == c->rates.end()) c->rates.push_back(rate);
                c->compiled.push_back({to_double(t.coeff), idx, t.r_power, t.s_power, t.c_power});
                if (t.s_power < 0) c->has_negative_s = true;
            }
            lazy_->data = std::move(c);
        });
        return *lazy_->data;
    }

    const SeriesCache& series_cache(const EvalOptions& opt) const {
        // The series is built once per expression with the first options seen.
        auto& sc = lazy_->series;
        std::call_once(sc.once, [&] {
            const auto laurent = laurent_at_zero(opt.series_order);
            sc.regular = laurent.regular();
            if (sc.regular) sc.taylor = laurent.taylor();
        });
        return sc;
    }

    Flavor flavor_;
    std::vector<SymTerm> terms_;
    // Lazily built evaluation data; shared between copies since expressions are immutable.
    std::shared_ptr<Lazy> lazy_ = std::make_shared<Lazy>();
};

/// Order of the pole of e at r = m pi, estimated from a discrete Laurent fit on
/// a circle of radius `radius` around the point.
inline int pole_order_at(const SymExpr& e, long m, double radius = 1e-2, int samples = 64,
                         double threshold = 1e-8) {
    if (e.flavor() != Flavor::circular) throw FlavorMismatch("pole_order_at: circular flavor required");
    if (m == 0) throw Error("pole_order_at: m must be nonzero");
    const Complex center(m * kPi, 0.0);
    std::vector<Complex> values(samples);
    for (int j = 0; j < samples; ++j) {
        const double th = kTwoPi * j / samples;
        values[j] = e.evaluate_direct(center + radius * Complex(std::cos(th), std::sin(th)));
    }
    // b_k = a_k radius^k for k in [-samples/2, samples/2).
    const int half = samples / 2;
    std::vector<Complex> b(samples);
    double peak = 0.0;
    for (int k = -half; k < half; ++k) {
        Complex acc(0.0, 0.0);
        for (int j = 0; j < samples; ++j) {
            const double th = kTwoPi * j / samples;
            acc += values[j] * Complex(std::cos(k * th), -std::sin(k * th));
        }
        b[k + half] = acc / static_cast<double>(samples);
        peak = std::max(peak, std::abs(b[k + half]));
    }
    if (peak == 0.0) return 0;
    int order = 0;
    for (int k = -half; k < 0; ++k) {
        if (std::abs(b[k + half]) > threshold * peak) {
            order = -k;
            break;
        }
    }
    // Residual of the fitted expansion on an inner circle.
    double resid = 0.0, scale = 0.0;
    const double inner = 0.8;
    for (int j = 0; j < 16; ++j) {
        const double th = kTwoPi * (j + 0.5) / 16;
        const Complex direct = e.evaluate_direct(center + inner * radius * Complex(std::cos(th), std::sin(th)));
        Complex fit(0.0, 0.0);
        for (int k = -half; k < half; ++k)
            fit += b[k + half] * std::pow(inner, k) * Complex(std::cos(k * th), std::sin(k * th));
        resid = std::max(resid, std::abs(fit - direct));
        scale = std::max(scale, std::abs(direct));
    }
    if (resid > 1e-6 * scale)
        throw AmbiguousOrder("pole_order_at: Laurent fit residual " + std::to_string(resid / scale));
    return order;
}

}  // namespace oddhyp
