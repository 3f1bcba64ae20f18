#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <type_traits>
#include <utility>

#include "omegastop/errors.hpp"

namespace omegastop::numerics {

struct QuadratureResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    std::size_t evaluations = 0;
};

struct QuadratureOptions {
    double tol = 1e-10;  ///< absolute
    int min_levels = 3;
    int max_levels = 11;
};

/// Integrand that also wants the distances to both ends of the interval.
/// Near an endpoint these are far more accurate than x - a or b - x.
template <class F>
concept GapAwareIntegrand = std::is_invocable_r_v<double, F, double, double, double>;

template <class F>
concept PlainIntegrand = std::is_invocable_r_v<double, F, double>;

namespace detail {

// Abscissae run out to |t| = 6, where the node gap to the endpoint is about
// 1e-276 of the half-width.
inline constexpr double kTanhSinhTMax = 6.0;

template <class F>
double call_integrand(F& f, double x, double gap_lo, double gap_hi) {
    if constexpr (GapAwareIntegrand<F>)
        return f(x, gap_lo, gap_hi);
    else
        return f(x);
}

}  // namespace detail

/// Tanh-sinh (double exponential) quadrature of f over [a, b].
///
/// Each level halves the step; the error estimate is the change between the
/// last two levels. Integrable endpoint singularities are fine as long as f
/// does not blow up at the nodes, which never touch the endpoints. Plain
/// integrands are not evaluated at nodes that round onto an endpoint.
template <class F>
QuadratureResult integrate_finite(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
    static_assert(GapAwareIntegrand<F> || PlainIntegrand<F>, "integrand must be f(x) or f(x, gap_lo, gap_hi)");
    if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("integrate_finite: non-finite limits");
    if (a == b) return {0.0, 0.0, 1};
    double sign = 1.0;
    if (a > b) {
        // gaps always refer to the lower and upper end of the sorted interval
        std::swap(a, b);
        sign = -1.0;
    }

    const double half = 0.5 * (b - a);
    const double mid = a + half;
    constexpr double pi_2 = 0.5 * std::numbers::pi;
    std::size_t evals = 0;
    double t_limit = detail::kTanhSinhTMax;

    // contribution of the symmetric pair of nodes at +-t
    auto pair = [&](double t) -> double {
        const double s = pi_2 * std::sinh(t);
        const double cs = std::cosh(s);
        const double weight = pi_2 * std::cosh(t) / (cs * cs);
        const double g = half * (2.0 / (std::exp(2.0 * s) + 1.0));  // distance to the nearest end
        if (g == 0.0) return 0.0;
        const double far = (b - a) - g;
        double total = 0.0;
        const double x_hi = b - g;
        const double x_lo = a + g;
        if constexpr (GapAwareIntegrand<F>) {
            total += f(x_hi, far, g) + f(x_lo, g, far);
            evals += 2;
        } else {
            if (x_hi < b && x_hi > a) {
                total += f(x_hi);
                ++evals;
            }
            if (x_lo > a && x_lo < b) {
                total += f(x_lo);
                ++evals;
            }
        }
        return weight * total;
    };

    double sum = pi_2 * detail::call_integrand(f, mid, half, half);
    ++evals;
    double peak = std::abs(sum);
    double last_significant = 0.0;
    for (int j = 1; j <= static_cast<int>(t_limit); ++j) {
        const double term = pair(static_cast<double>(j));
        sum += term;
        if (!std::isfinite(term))
            throw NumericError("integrate_finite: integrand returned a non-finite value");
        peak = std::max(peak, std::abs(term));
        if (std::abs(term) > 1e-30 * peak) last_significant = j;
    }
    // Nodes beyond the last significant one at the coarse level only cost
    // evaluations; keep one unit of margin.
    t_limit = std::min(detail::kTanhSinhTMax, last_significant + 1.0);

    double h = 1.0;
    double estimate = h * half * sum;
    double error = std::numeric_limits<double>::infinity();
    for (int level = 1; level <= opt.max_levels; ++level) {
        h *= 0.5;
        double added = 0.0;
        for (double t = h; t <= t_limit; t += 2.0 * h) added += pair(t);
        if (!std::isfinite(added)) throw NumericError("integrate_finite: integrand returned a non-finite value");
        sum += added;
        const double next = h * half * sum;
        error = std::abs(next - estimate);
        estimate = next;
        if (level >= opt.min_levels && error <= opt.tol) return {sign * estimate, error, evals};
    }
    throw QuadratureBudgetExceeded("integrate_finite: refinement budget exhausted", sign * estimate, error);
}

/// Integral of f over (lower, inf).
///
/// The half line is mapped onto [0, 1) by x = lower + u/(1-u) so that any
/// decay of f becomes an endpoint behaviour of the mapped integrand. With
/// `singular_at_lower` the range is split at lower + 1 so the singular end
/// keeps its own, unmapped, tanh-sinh resolution. Gap-aware integrands take
/// (x, x - lower).
template <class F>
QuadratureResult integrate_semi_infinite(F&& f, double lower, double tol = 1e-10, bool singular_at_lower = false,
                                         QuadratureOptions opt = {}) {
    constexpr bool gap_aware = std::is_invocable_r_v<double, F, double, double>;
    static_assert(gap_aware || PlainIntegrand<F>, "integrand must be f(x) or f(x, x - lower)");
    if (!std::isfinite(lower)) throw DomainError("integrate_semi_infinite: non-finite lower limit");
    opt.tol = tol;

    auto eval = [&](double offset) -> double {
        if constexpr (gap_aware)
            return f(lower + offset, offset);
        else
            return f(lower + offset);
    };

    double start = 0.0;
    QuadratureResult head{};
    if (singular_at_lower) {
        opt.tol = 0.5 * tol;
        head = integrate_finite([&](double, double gap_lo, double) { return eval(gap_lo); }, 0.0, 1.0, opt);
        start = 1.0;
    }
    auto tail = integrate_finite(
        [&](double u, double gap_lo, double gap_hi) -> double {
            (void)u;
            const double offset = start + gap_lo / gap_hi;
            const double value = eval(offset);
            if (value == 0.0) return 0.0;
            return value / gap_hi / gap_hi;
        },
        0.0, 1.0, opt);
    return {head.value + tail.value, head.abs_error_estimate + tail.abs_error_estimate,
            head.evaluations + tail.evaluations};
}

}  // namespace omegastop::numerics
