#pragma once

// Truncated power series with high-precision coefficients. Used to build the
// Taylor/Laurent expansion of an expression at r = 0, where the individual
// terms carry negative powers of sin r that cancel in the sum.

#include "oddhyp/core/errors.hpp"
#include "oddhyp/core/scalar.hpp"

#include <cstddef>
#include <vector>

namespace oddhyp {

class PowerSeries {
public:
    PowerSeries() = default;
    explicit PowerSeries(std::size_t order) : coeffs_(order + 1, Scalar(0)) {}

    static PowerSeries constant(std::size_t order, const Scalar& value) {
        PowerSeries s(order);
        s.coeffs_[0] = value;
        return s;
    }

    std::size_t order() const { return coeffs_.size() - 1; }
    const Scalar& operator[](std::size_t k) const { return coeffs_[k]; }
    Scalar& operator[](std::size_t k) { return coeffs_[k]; }
    const std::vector<Scalar>& coeffs() const { return coeffs_; }

    PowerSeries& operator+=(const PowerSeries& other) {
        for (std::size_t k = 0; k < coeffs_.size() && k < other.coeffs_.size(); ++k)
            coeffs_[k] += other.coeffs_[k];
        return *this;
    }

    PowerSeries& operator*=(const Scalar& x) {
        for (auto& c : coeffs_) c *= x;
        return *this;
    }

    friend PowerSeries operator*(const PowerSeries& a, const PowerSeries& b) {
        const std::size_t n = std::min(a.order(), b.order());
        PowerSeries out(n);
        for (std::size_t i = 0; i <= n; ++i) {
            if (a.coeffs_[i] == 0) continue;
            for (std::size_t j = 0; i + j <= n; ++j) out.coeffs_[i + j] += a.coeffs_[i] * b.coeffs_[j];
        }
        return out;
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    PowerSeries inverse() const {
        if (coeffs_[0] == 0) throw Error("PowerSeries::inverse: zero constant term");
        PowerSeries out(order());
        out.coeffs_[0] = 1 / coeffs_[0];
        for (std::size_t k = 1; k <= order(); ++k) {
            Scalar acc = 0;
            for (std::size_t j = 1; j <= k; ++j) acc += coeffs_[j] * out.coeffs_[k - j];
            out.coeffs_[k] = -acc * out.coeffs_[0];
        }
        return out;
    }

    /// Integer power, negative exponents allowed when the constant term is nonzero.
    PowerSeries pow(int e) const {
        if (e < 0) return inverse().pow(-e);
        PowerSeries out = constant(order(), Scalar(1));
        PowerSeries base = *this;
        while (e > 0) {
            if (e & 1) out = out * base;
            e >>= 1;
            if (e > 0) base = base * base;
        }
        return out;
    }

    template <class T>
    T evaluate(T x) const {
        T acc = T(0);
        for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * x + T(static_cast<double>(coeffs_[k]));
        return acc;
    }

private:
    std::vector<Scalar> coeffs_{Scalar(0)};
};

namespace series {

/// sin r / r (circular) or sinh r / r (hyperbolic).
inline PowerSeries sinc(std::size_t order, bool hyperbolic) {
    PowerSeries s(order);
    Scalar term = 1;  // 1/(2m+1)!
    for (std::size_t m = 0; 2 * m <= order; ++m) {
        if (m > 0) term /= Scalar((2 * m) * (2 * m + 1));
        s[2 * m] = (hyperbolic || m % 2 == 0) ? term : Scalar(-term);
    }
    return s;
}

/// cos r (circular) or cosh r (hyperbolic).
inline PowerSeries cosine(std::size_t order, bool hyperbolic) {
    PowerSeries s(order);
    Scalar term = 1;  // 1/(2m)!
    for (std::size_t m = 0; 2 * m <= order; ++m) {
        if (m > 0) term /= Scalar((2 * m - 1) * (2 * m));
        s[2 * m] = (hyperbolic || m % 2 == 0) ? term : Scalar(-term);
    }
    return s;
}

/// exp(-a r^2).
inline PowerSeries gaussian(std::size_t order, const Scalar& rate) {
    PowerSeries s(order);
    Scalar term = 1;
    for (std::size_t m = 0; 2 * m <= order; ++m) {
        if (m > 0) term *= -rate / Scalar(m);
        s[2 * m] = term;
    }
    return s;
}

}  // namespace series
}  // namespace oddhyp
