#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <numbers>

#include "omegastop/errors.hpp"

namespace omegastop::numerics {

using Complex = std::complex<double>;

/// Arguments closer than this to a nonpositive integer are treated as poles
/// when they appear in a numerator gamma.
inline constexpr double kPoleTolerance = 1e-8;

inline bool is_finite(Complex z) noexcept {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// True if x is within `tol` of {0, -1, -2, ...}.
inline bool near_nonpositive_integer(double x, double tol = 0.0) noexcept {
    if (x > tol) return false;
    return std::abs(x - std::round(x)) <= tol;
}

inline bool near_nonpositive_integer(Complex z, double tol = 0.0) noexcept {
    return std::abs(z.imag()) <= tol && near_nonpositive_integer(z.real(), tol);
}

namespace detail {

// B_{2n} / (2n (2n-1)), n = 1..8
inline constexpr std::array<double, 8> kStirlingCoefficients = {
    1.0 / 12.0,           -1.0 / 360.0,    1.0 / 1260.0,  -1.0 / 1680.0,
    1.0 / 1188.0,         -691.0 / 360360.0, 1.0 / 156.0, -3617.0 / 122400.0,
};

inline constexpr double kStirlingMinRe = 12.0;

inline Complex stirling_log_gamma(Complex z) {
    const Complex inv = 1.0 / z;
    const Complex inv2 = inv * inv;
    Complex series = 0.0;
    Complex power = inv;
    for (double c : kStirlingCoefficients) {
        series += c * power;
        power *= inv2;
    }
    constexpr double half_log_two_pi = 0.91893853320467274178;
    return (z - 0.5) * std::log(z) - z + half_log_two_pi + series;
}

}  // namespace detail

/// Principal branch of log Gamma(z).
///
/// Stirling's series is applied once Re z >= 12; smaller arguments are shifted
/// up with log Gamma(z) = log Gamma(z + n) - sum_{j<n} log(z + j). Every term is
/// analytic off (-inf, 0], so the result is the continuation of the real
/// log-gamma from the positive axis. On the negative real axis the value is
/// the limit from the upper half plane.
inline Complex log_gamma(Complex z) {
    if (!is_finite(z)) throw DomainError("log_gamma: non-finite argument");
    if (near_nonpositive_integer(z)) throw PoleError("log_gamma: pole of the gamma function");

    Complex shift = 0.0;
    Complex w = z;
    while (w.real() < detail::kStirlingMinRe) {
        shift += std::log(w);
        w += 1.0;
    }
    return detail::stirling_log_gamma(w) - shift;
}

/// log |Gamma(x)| for real x; +inf at poles.
inline double log_abs_gamma(double x) noexcept {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

/// Sign of Gamma(x); 0 at poles.
inline int gamma_sign(double x) noexcept {
    if (x > 0.0) return 1;
    if (x == std::floor(x)) return 0;
    // Gamma is negative on (-1, 0), positive on (-2, -1), ...
    const auto cells = static_cast<long long>(std::ceil(-x));
    return (cells % 2 == 1) ? -1 : 1;
}

/// prod Gamma(num_i) / prod Gamma(den_j) for real arguments, computed in log
/// space. A denominator pole makes the ratio 0; a numerator pole (within
/// kPoleTolerance) raises PoleError.
inline double gamma_ratio(std::initializer_list<double> num, std::initializer_list<double> den) {
    double log_sum = 0.0;
    int sign = 1;
    for (double a : num) {
        if (!std::isfinite(a)) throw DomainError("gamma_ratio: non-finite argument");
        if (near_nonpositive_integer(a, kPoleTolerance))
            throw PoleError("gamma_ratio: numerator argument at a pole of the gamma function");
        log_sum += log_abs_gamma(a);
        sign *= gamma_sign(a);
    }
    for (double b : den) {
        if (!std::isfinite(b)) throw DomainError("gamma_ratio: non-finite argument");
        const int s = gamma_sign(b);
        if (s == 0) return 0.0;
        log_sum -= log_abs_gamma(b);
        sign *= s;
    }
    return sign * std::exp(log_sum);
}

/// Complex analogue of gamma_ratio.
inline Complex gamma_ratio(std::initializer_list<Complex> num, std::initializer_list<Complex> den) {
    Complex log_sum = 0.0;
    for (Complex a : num) {
        if (near_nonpositive_integer(a, kPoleTolerance))
            throw PoleError("gamma_ratio: numerator argument at a pole of the gamma function");
        log_sum += log_gamma(a);
    }
    for (Complex b : den) {
        if (near_nonpositive_integer(b)) return 0.0;
        log_sum -= log_gamma(b);
    }
    return std::exp(log_sum);
}

}  // namespace omegastop::numerics
