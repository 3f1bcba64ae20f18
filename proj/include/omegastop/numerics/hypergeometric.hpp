#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "omegastop/errors.hpp"
#include "omegastop/numerics/gamma.hpp"

namespace omegastop::numerics {

namespace detail {

inline constexpr int kHypergeometricMaxTerms = 20000;

/// Plain Gauss series sum_n (a)_n (b)_n / ((c)_n n!) x^n for |x| < 1.
inline double gauss_series(double a, double b, double c, double x) {
    double term = 1.0;
    double sum = 1.0;
    double compensation = 0.0;
    for (int n = 0; n < kHypergeometricMaxTerms; ++n) {
        const double ratio = (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x;
        term *= ratio;
        if (term == 0.0) return sum + compensation;
        // Kahan step; the tail can be long when x is close to 1
        const double y = term - compensation;
        const double t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
        if (std::abs(ratio) < 1.0 &&
            std::abs(term) <= 0.25 * std::numeric_limits<double>::epsilon() * std::abs(sum) * (1.0 - std::abs(ratio)))
            return sum;
    }
    throw SeriesNonConvergence("gauss_2f1: series did not converge within the term budget", sum,
                               std::abs(term));
}

}  // namespace detail

/// Gauss hypergeometric function 2F1(a, b; c; .) on [0, 1) for fixed real
/// parameters, and at 1 when c - a - b > 0.
///
/// For x <= 1/2 the defining series is summed directly. Beyond that the
/// 1 - x connection formula is used, with the connection coefficients cached
/// at construction. Callers that know 1 - x more accurately than the
/// subtraction would give it (e.g. 1 - x = e^{-z}) can pass it in.
class GaussHypergeometric {
public:
    GaussHypergeometric(double a, double b, double c) : a_(a), b_(b), c_(c) {
        if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
            throw DomainError("gauss_2f1: non-finite parameter");
        if (near_nonpositive_integer(c, kPoleTolerance))
            throw PoleError("gauss_2f1: c is a nonpositive integer");
        s_ = c - a - b;
        near_integer_s_ = std::abs(s_ - std::round(s_)) < kIntegerBand;
        if (!near_integer_s_) {
            coef_a_ = gamma_ratio({c, s_}, {c - a, c - b});
            coef_b_ = gamma_ratio({c, -s_}, {a, b});
        }
    }

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double c() const noexcept { return c_; }

    double operator()(double x) const { return (*this)(x, 1.0 - x); }

    double operator()(double x, double one_minus_x) const {
        if (!(x >= 0.0 && x <= 1.0) || !(one_minus_x >= 0.0))
            throw DomainError("gauss_2f1: argument outside [0, 1]");
        if (one_minus_x == 0.0 && !(s_ > 0.0)) throw DomainError("gauss_2f1: diverges at 1 unless c - a - b > 0");
        if (x == 0.0) return 1.0;
        if (x <= 0.5) return detail::gauss_series(a_, b_, c_, x);
        if (!near_integer_s_) return connection(x, one_minus_x);
        if (x <= kDirectSeriesLimit) return detail::gauss_series(a_, b_, c_, x);
        // c - a - b within kIntegerBand of an integer: the connection formula
        // has cancelling poles there. Interpolate in c through four shifted
        // parameter sets that sit safely off the integer.
        const double target = std::round(s_);
        const double d = s_ - target;
        constexpr double nodes[4] = {-2.0 * kIntegerOffset, -kIntegerOffset, kIntegerOffset, 2.0 * kIntegerOffset};
        double value = 0.0;
        for (int i = 0; i < 4; ++i) {
            double weight = 1.0;
            for (int j = 0; j < 4; ++j)
                if (j != i) weight *= (d - nodes[j]) / (nodes[i] - nodes[j]);
            const GaussHypergeometric shifted(a_, b_, c_ + (nodes[i] - d));
            value += weight * shifted.connection(x, one_minus_x);
        }
        return value;
    }

private:
    static constexpr double kIntegerBand = 1e-5;
    static constexpr double kIntegerOffset = 4e-5;
    static constexpr double kDirectSeriesLimit = 0.9;

    double connection(double x, double y) const {
        (void)x;
        double value = 0.0;
        if (coef_a_ != 0.0) value += coef_a_ * detail::gauss_series(a_, b_, 1.0 - s_, y);
        if (coef_b_ != 0.0)
            value += coef_b_ * std::pow(y, s_) * detail::gauss_series(c_ - a_, c_ - b_, s_ + 1.0, y);
        return value;
    }

    double a_, b_, c_;
    double s_ = 0.0;
    bool near_integer_s_ = false;
    double coef_a_ = 0.0;
    double coef_b_ = 0.0;
};

/// 2F1(a, b; c; x) for real parameters and x in [0, 1], see GaussHypergeometric.
inline double gauss_2f1(double a, double b, double c, double x) {
    return GaussHypergeometric(a, b, c)(x);
}

/// Same, with 1 - x supplied by the caller.
inline double gauss_2f1(double a, double b, double c, double x, double one_minus_x) {
    return GaussHypergeometric(a, b, c)(x, one_minus_x);
}

}  // namespace omegastop::numerics
