#pragma once

#include <cmath>
#include <numbers>

#include "omegastop/errors.hpp"
#include "omegastop/model.hpp"
#include "omegastop/numerics/gamma.hpp"
#include "omegastop/simulate/rng.hpp"

namespace omegastop::sim {

/// Skewness beta of the S(alpha, beta, 0) law whose positivity parameter is rho:
/// rho = 1/2 + arctan(beta tan(pi alpha/2)) / (pi alpha).
inline double rho_to_skewness(const StableParams& params) {
    const double a = params.alpha();
    if (a == 1.0) return 0.0;  // only rho = 1/2 is admissible there
    constexpr double pi = std::numbers::pi;
    return std::tan(pi * a * (params.rho() - 0.5)) / std::tan(0.5 * pi * a);
}

inline double skewness_to_rho(double alpha, double beta) {
    constexpr double pi = std::numbers::pi;
    if (alpha == 1.0) {
        if (beta != 0.0) throw DomainError("skewness_to_rho: alpha = 1 needs beta = 0");
        return 0.5;
    }
    return 0.5 + std::atan(beta * std::tan(0.5 * pi * alpha)) / (pi * alpha);
}

/// c+ + c- of S(alpha, beta, 0) with unit scale.
inline double unit_scale_jump_mass(double alpha) {
    constexpr double pi = std::numbers::pi;
    if (alpha == 1.0) return 2.0 / pi;
    return alpha / (std::exp(numerics::log_abs_gamma(1.0 - alpha)) * numerics::gamma_sign(1.0 - alpha) *
                    std::cos(0.5 * pi * alpha));
}

/// Clock factor s with X_t = Z_{s t}, Z unit-scale stable and X carrying the
/// jump intensities c+ and c- of the model.
inline double clock_factor(const StableModel& m) {
    return (m.c_plus() + m.c_minus()) / unit_scale_jump_mass(m.alpha());
}

/// Chambers-Mallows-Stuck sampler for unit-scale S(alpha, beta, 0).
class StableSampler {
public:
    explicit StableSampler(const StableParams& params) : alpha_(params.alpha()) {
        constexpr double pi = std::numbers::pi;
        const double beta = rho_to_skewness(params);
        if (alpha_ != 1.0) {
            const double tan_term = beta * std::tan(0.5 * pi * alpha_);
            shift_ = std::atan(tan_term) / alpha_;
            scale_ = std::pow(1.0 + tan_term * tan_term, 1.0 / (2.0 * alpha_));
        }
    }

    /// Uses exactly two uniforms whatever the parameters.
    double operator()(PathRng& rng) const {
        constexpr double pi = std::numbers::pi;
        const double v = pi * (rng.uniform() - 0.5);
        const double w = -std::log(rng.uniform());
        if (alpha_ == 1.0) return std::tan(v);
        const double arg = alpha_ * (v + shift_);
        return scale_ * std::sin(arg) / std::pow(std::cos(v), 1.0 / alpha_) *
               std::pow(std::cos(v - arg) / w, (1.0 - alpha_) / alpha_);
    }

    double alpha() const noexcept { return alpha_; }

private:
    double alpha_;
    double shift_ = 0.0;
    double scale_ = 1.0;
};

/// One increment of the model's stable process over a time step dt.
inline double sample_stable_increment(PathRng& rng, double dt, const StableModel& m) {
    if (!(dt > 0.0)) throw DomainError("sample_stable_increment: dt must be positive");
    const StableSampler sampler(m.params());
    return std::pow(clock_factor(m) * dt, 1.0 / m.alpha()) * sampler(rng);
}

}  // namespace omegastop::sim
