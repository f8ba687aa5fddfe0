#pragma once

// Numeric types shared by every module.
//
// Symbolic coefficients are carried in 50-digit binary floating point so that
// the cancellations inside shift-operator images (and their Laurent series at
// the origin) happen far below double precision. Evaluation at a point runs
// in std::complex<double>.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <complex>
#include <numbers>

namespace oddhyp {

using Scalar = boost::multiprecision::cpp_bin_float_50;
using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline const Scalar& pi_scalar() {
    static const Scalar value = boost::multiprecision::atan(Scalar(1)) * 4;
    return value;
}

inline const Scalar& two_pi_scalar() {
    static const Scalar value = pi_scalar() * 2;
    return value;
}

inline double to_double(const Scalar& x) { return static_cast<double>(x); }

/// (2k-1)!! with the convention (-1)!! = 1.
inline Scalar double_factorial_odd(int k) {
    Scalar out = 1;
    for (int j = 1; j <= 2 * k - 1; j += 2) out *= j;
    return out;
}

inline double double_factorial_odd_d(int k) { return to_double(double_factorial_odd(k)); }

inline Scalar binomial(int m, int i) {
    Scalar out = 1;
    for (int j = 1; j <= i; ++j) {
        out *= (m - i + j);
        out /= j;
    }
    return out;
}

/// Integer power that stays exact for small exponents and tolerates negatives.
inline Complex ipow(Complex z, int k) {
    if (k == 0) return Complex(1.0, 0.0);
    if (k < 0) return 1.0 / ipow(z, -k);
    Complex out(1.0, 0.0);
    Complex base = z;
    while (k > 0) {
        if (k & 1) out *= base;
        base *= base;
        k >>= 1;
    }
    return out;
}

inline double ipow(double x, int k) { return std::pow(x, k); }

inline double rel_diff(Complex a, Complex b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

}  // namespace oddhyp
