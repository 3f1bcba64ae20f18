#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>

#include "omegastop/errors.hpp"
#include "omegastop/numerics/gamma.hpp"

namespace omegastop {

/// Index alpha and positivity parameter rho = P(X_t >= 0) of a strictly
/// stable process. Only admissible pairs can be constructed.
class StableParams {
public:
    double alpha() const noexcept { return alpha_; }
    double rho() const noexcept { return rho_; }
    double rho_hat() const noexcept { return 1.0 - rho_; }
    double alpha_rho() const noexcept { return alpha_ * rho_; }
    double alpha_rho_hat() const noexcept { return alpha_ * (1.0 - rho_); }

private:
    StableParams(double alpha, double rho) : alpha_(alpha), rho_(rho) {}
    friend StableParams validate_params(double alpha, double rho);

    double alpha_;
    double rho_;
};

/// Checks (alpha, rho) against the admissible set:
///   alpha in (0,1) with rho in (0,1), alpha in (1,2) with
///   rho in (1 - 1/alpha, 1/alpha), or (alpha, rho) = (1, 1/2).
inline StableParams validate_params(double alpha, double rho) {
    auto fail = [&](const std::string& why) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "inadmissible stable parameters (alpha=" << alpha << ", rho=" << rho << "): " << why;
        throw InadmissibleParameters(msg.str());
    };
    if (!std::isfinite(alpha) || !std::isfinite(rho)) fail("non-finite value");
    if (!(alpha > 0.0 && alpha < 2.0)) fail("alpha must lie in (0,2)");
    if (alpha < 1.0) {
        if (!(rho > 0.0 && rho < 1.0)) fail("branch alpha in (0,1) requires rho in (0,1)");
    } else if (alpha == 1.0) {
        if (rho != 0.5) fail("branch alpha = 1 requires rho = 1/2");
    } else {
        const double lo = 1.0 - 1.0 / alpha;
        const double hi = 1.0 / alpha;
        if (!(rho > lo && rho < hi)) {
            std::ostringstream why;
            why.precision(17);
            why << "branch alpha in (1,2) requires rho in (" << lo << ", " << hi << ")";
            fail(why.str());
        }
    }
    return StableParams(alpha, rho);
}

/// omega(x) = k (-x)^{-alpha} for x < 0 and 0 otherwise.
struct OmegaClock {
    double k = 0.0;
};

inline OmegaClock make_clock(double k) {
    if (!std::isfinite(k) || k < 0.0) throw InadmissibleParameters("killing coefficient k must be finite and >= 0");
    return OmegaClock{k};
}

/// Gain g(x) = (x^r - K)^+ on x >= 0.
struct GainSpec {
    double r = 0.0;
    double K = 1.0;
};

inline GainSpec make_gain(double r, double K) {
    if (!std::isfinite(r) || r == 0.0) throw DomainError("payoff exponent r must be finite and nonzero");
    if (!std::isfinite(K) || !(K > 0.0)) throw DomainError("strike K must be finite and > 0");
    return GainSpec{r, K};
}

inline double payoff(double x, const GainSpec& gain) {
    if (!(x > 0.0)) return 0.0;
    return std::max(std::pow(x, gain.r) - gain.K, 0.0);
}

/// Upward and downward jump intensities c+ and c- of the Levy measure.
inline std::pair<double, double> intensity_constants(const StableParams& params) {
    const double a = params.alpha();
    const double c_plus = numerics::gamma_ratio({a + 1.0}, {params.alpha_rho(), 1.0 - params.alpha_rho()});
    const double c_minus = numerics::gamma_ratio({a + 1.0}, {params.alpha_rho_hat(), 1.0 - params.alpha_rho_hat()});
    return {c_plus, c_minus};
}

/// Probability of being killed during one negative excursion,
/// k / (c+/alpha + k).
inline double killing_probability(const StableParams& params, const OmegaClock& clock) {
    if (clock.k == 0.0) return 0.0;
    const double rate = intensity_constants(params).first / params.alpha();
    return clock.k / (rate + clock.k);
}

/// Root delta of (1-p) sin(pi a rho) sin(pi a rho_hat) = sin(pi(a rho - delta)) sin(pi(a rho_hat - delta))
/// in [max(0, alpha-1), min(alpha rho, alpha rho_hat)).
///
/// Closed form delta = (alpha - s)/2 with
///   s = arccos(p cos(pi D) + (1-p) cos(pi alpha)) / pi,  D = alpha rho - alpha rho_hat,
/// evaluated through the half-angle form of arccos to stay accurate when the
/// argument is close to -1.
inline double compute_delta(const StableParams& params, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("compute_delta: p must lie in [0,1]");
    const double a = params.alpha();
    if (p == 0.0) return std::max(0.0, a - 1.0);
    constexpr double pi = std::numbers::pi;
    const double d = params.alpha_rho() - params.alpha_rho_hat();
    const double sd = std::sin(0.5 * pi * d), cd = std::cos(0.5 * pi * d);
    const double sa = std::sin(0.5 * pi * a), ca = std::cos(0.5 * pi * a);
    const double sin2 = p * sd * sd + (1.0 - p) * sa * sa;
    const double cos2 = p * cd * cd + (1.0 - p) * ca * ca;
    const double s = (2.0 / pi) * std::atan2(std::sqrt(sin2), std::sqrt(cos2));
    return 0.5 * (a - s);
}

inline double delta_identity_residual(const StableParams& params, double p, double delta) {
    constexpr double pi = std::numbers::pi;
    const double ar = params.alpha_rho(), arh = params.alpha_rho_hat();
    return std::abs((1.0 - p) * std::sin(pi * ar) * std::sin(pi * arh) -
                    std::sin(pi * (ar - delta)) * std::sin(pi * (arh - delta)));
}

/// delta for rho = 1/2: alpha/2 - asin(sqrt(1-p) sin(pi alpha/2)) / pi. Evaluated
/// as an angle difference through atan2, with the sine part rationalised
/// where it cancels (alpha <= 1).
inline double symmetric_delta(double alpha, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("symmetric_delta: p must lie in [0,1]");
    constexpr double pi = std::numbers::pi;
    const double s = std::sin(0.5 * pi * alpha), c = std::cos(0.5 * pi * alpha);
    const double root = std::sqrt(c * c + p * s * s);
    const double keep = std::sqrt(1.0 - p);
    const double bracket = c >= 0.0 ? p / (root + keep * c) : root - keep * c;
    return std::atan2(s * bracket, c * root + keep * s * s) / pi;
}

inline double omega_rate(double x, const OmegaClock& clock, const StableParams& params) {
    if (x >= 0.0 || clock.k == 0.0) return 0.0;
    return clock.k * std::pow(-x, -params.alpha());
}

/// q through the Wiener-Hopf factors at zero,
/// Gamma(a rho) Gamma(a) Gamma(1 - a rho) / (Gamma(delta) Gamma(a - delta) Gamma(delta + 1 - a) Gamma(1 - delta)).
inline double q_from_factors(const StableParams& params, double delta) {
    const double a = params.alpha(), ar = params.alpha_rho();
    return numerics::gamma_ratio({ar, a, 1.0 - ar}, {delta, a - delta, delta + 1.0 - a, 1.0 - delta});
}

/// q through the killing rate, (c-/alpha) k / (k + c+/alpha).
inline double q_from_killing(const StableParams& params, const OmegaClock& clock) {
    const auto [c_plus, c_minus] = intensity_constants(params);
    const double a = params.alpha();
    return (c_minus / a) * clock.k / (clock.k + c_plus / a);
}

/// Stable parameters, omega-clock and every constant derived from them.
/// Immutable once built.
class StableModel {
public:
    StableModel(const StableParams& params, const OmegaClock& clock) : params_(params), clock_(clock) {
        std::tie(c_plus_, c_minus_) = intensity_constants(params_);
        p_ = killing_probability(params_, clock_);
        delta_ = compute_delta(params_, p_);
        q_ = q_from_killing(params_, clock_);
    }

    StableModel(double alpha, double rho, double k) : StableModel(validate_params(alpha, rho), make_clock(k)) {}

    const StableParams& params() const noexcept { return params_; }
    const OmegaClock& clock() const noexcept { return clock_; }
    double alpha() const noexcept { return params_.alpha(); }
    double rho() const noexcept { return params_.rho(); }
    double rho_hat() const noexcept { return params_.rho_hat(); }
    double alpha_rho() const noexcept { return params_.alpha_rho(); }
    double alpha_rho_hat() const noexcept { return params_.alpha_rho_hat(); }
    double k() const noexcept { return clock_.k; }
    double c_plus() const noexcept { return c_plus_; }
    double c_minus() const noexcept { return c_minus_; }
    double p() const noexcept { return p_; }
    double delta() const noexcept { return delta_; }
    double q() const noexcept { return q_; }

    /// delta + 1 - alpha: the exponent bounding finite put-type gains.
    double delta_hat() const noexcept { return delta_ + 1.0 - params_.alpha(); }

    double delta_residual() const { return delta_identity_residual(params_, p_, delta_); }

private:
    StableParams params_;
    OmegaClock clock_;
    double c_plus_ = 0.0;
    double c_minus_ = 0.0;
    double p_ = 0.0;
    double delta_ = 0.0;
    double q_ = 0.0;
};

}  // namespace omegastop
