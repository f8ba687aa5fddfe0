#pragma once

// Quadrature rules: Gauss-Legendre of arbitrary order and a globally adaptive
// 21-point Gauss-Kronrod integrator for complex-valued integrands over a set of
// parameterized pieces. The integrator refines the interval with the largest
// error estimate first, so for identical input it is fully deterministic.

#include "oddhyp/core/errors.hpp"
#include "oddhyp/core/scalar.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

namespace oddhyp {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }

    template <class F>
    auto integrate(F&& f) const {
        using R = decltype(f(0.0));
        R acc{};
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }

    /// n-point Gauss-Legendre on [a, b].
    static QuadratureRule gauss_legendre(int n, double a, double b) {
        QuadratureRule rule;
        rule.nodes.resize(n);
        rule.weights.resize(n);
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (b + a);
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                if (n == 1) p0 = 1.0, p1 = x;
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            // Recompute derivative at the converged node.
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            rule.nodes[i] = mid - half * x;
            rule.nodes[n - 1 - i] = mid + half * x;
            rule.weights[i] = half * w;
            rule.weights[n - 1 - i] = half * w;
        }
        return rule;
    }

    /// Composite Gauss-Legendre with `per_panel` nodes on each [breaks[i], breaks[i+1]].
    static QuadratureRule composite(const std::vector<double>& breaks, int per_panel) {
        QuadratureRule rule;
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
            if (!(breaks[i + 1] > breaks[i])) continue;
            const auto panel = gauss_legendre(per_panel, breaks[i], breaks[i + 1]);
            rule.nodes.insert(rule.nodes.end(), panel.nodes.begin(), panel.nodes.end());
            rule.weights.insert(rule.weights.end(), panel.weights.begin(), panel.weights.end());
        }
        return rule;
    }

    /// Trapezoid weights on arbitrary increasing nodes (the interval is [nodes.front(), nodes.back()]).
    static QuadratureRule trapezoid(std::vector<double> nodes) {
        QuadratureRule rule;
        rule.weights.assign(nodes.size(), 0.0);
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            const double h = nodes[i + 1] - nodes[i];
            rule.weights[i] += 0.5 * h;
            rule.weights[i + 1] += 0.5 * h;
        }
        rule.nodes = std::move(nodes);
        return rule;
    }
};

struct QuadTolerance {
    double abs = 0.0;
    double rel = 1e-12;
    int max_intervals = 4000;
};

struct QuadResult {
    Complex value{};
    double error = 0.0;
    int evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525478344, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Interval {
    int piece;
    double a, b;
    Complex value;
    double error;
    double magnitude;  // integral of |f|, for the roundoff floor
};

struct ByError {
    bool operator()(const Interval& x, const Interval& y) const {
        if (x.error != y.error) return x.error < y.error;
        if (x.piece != y.piece) return x.piece > y.piece;
        return x.a > y.a;
    }
};

template <class F>
Interval gk21(F& f, int piece, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const Complex fc = f(piece, mid);
    Complex kron = fc * kWgk[10];
    Complex gauss{};
    double mag = std::abs(fc) * kWgk[10];
    for (int j = 0; j < 10; ++j) {
        const double dx = half * kXgk[j];
        const Complex f1 = f(piece, mid - dx);
        const Complex f2 = f(piece, mid + dx);
        kron += kWgk[j] * (f1 + f2);
        mag += kWgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
    }
    Interval out;
    out.piece = piece;
    out.a = a;
    out.b = b;
    out.value = kron * half;
    out.error = std::abs((kron - gauss) * half);
    out.magnitude = mag * std::abs(half);
    return out;
}

}  // namespace detail

/// Integrate f(piece, s) over s in [0, 1] for piece = 0 .. pieces-1 and sum.
/// The caller folds any Jacobian into f. Stops when the summed error estimate
/// is below max(tol.abs, tol.rel * |I|); throws ToleranceNotMet otherwise.
template <class F>
QuadResult adaptive_gk(F&& f, int pieces, const QuadTolerance& tol) {
    std::priority_queue<detail::Interval, std::vector<detail::Interval>, detail::ByError> queue;
    QuadResult result;
    double total_error = 0.0;
    double total_mag = 0.0;
    for (int p = 0; p < pieces; ++p) {
        auto iv = detail::gk21(f, p, 0.0, 1.0);
        result.value += iv.value;
        total_error += iv.error;
        total_mag += iv.magnitude;
        result.evaluations += 21;
        queue.push(iv);
    }
    const double eps = std::numeric_limits<double>::epsilon();
    auto target = [&] {
        const double floor = 50.0 * eps * total_mag;
        return std::max({tol.abs, tol.rel * std::abs(result.value), floor});
    };
    int intervals = pieces;
    while (!queue.empty() && total_error > target()) {
        if (intervals >= tol.max_intervals) {
            result.error = total_error;
            throw ToleranceNotMet("adaptive_gk: interval budget exhausted", total_error);
        }
        const auto worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            result.error = total_error;
            throw ToleranceNotMet("adaptive_gk: interval collapsed", total_error);
        }
        auto left = detail::gk21(f, worst.piece, worst.a, mid);
        auto right = detail::gk21(f, worst.piece, mid, worst.b);
        result.evaluations += 42;
        result.value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        total_mag += left.magnitude + right.magnitude - worst.magnitude;
        queue.push(left);
        queue.push(right);
        ++intervals;
    }
    // Recompute the sums from the leaves to shed accumulated update roundoff.
    Complex value{};
    double err = 0.0;
    std::vector<detail::Interval> leaves;
    leaves.reserve(queue.size());
    while (!queue.empty()) {
        leaves.push_back(queue.top());
        queue.pop();
    }
    std::sort(leaves.begin(), leaves.end(), [](const auto& x, const auto& y) {
        return x.piece != y.piece ? x.piece < y.piece : x.a < y.a;
    });
    for (const auto& iv : leaves) {
        value += iv.value;
        err += iv.error;
    }
    result.value = value;
    result.error = err;
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
        throw ToleranceNotMet("adaptive_gk: non-finite integrand", err);
    return result;
}

/// Real interval [a, b] with a complex-valued integrand g(x).
template <class G>
QuadResult integrate_interval(G&& g, double a, double b, const QuadTolerance& tol) {
    const double h = b - a;
    auto f = [&](int, double s) -> Complex { return Complex(g(a + h * s)) * h; };
    return adaptive_gk(f, 1, tol);
}

}  // namespace oddhyp
