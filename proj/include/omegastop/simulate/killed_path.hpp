#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "omegastop/errors.hpp"
#include "omegastop/model.hpp"
#include "omegastop/simulate/rng.hpp"
#include "omegastop/simulate/stable_sampler.hpp"

namespace omegastop::sim {

/// How the time grid is laid out.
///  - Scaled: the real-time step at state x is dt |x|^alpha, a constant step
///    in the Lamperti clock. `horizon` bounds that clock (steps * dt).
///  - Fixed: constant real-time step dt; `horizon` bounds real time.
enum class StepMode { Scaled, Fixed };

inline std::string_view to_string(StepMode mode) { return mode == StepMode::Scaled ? "scaled" : "fixed"; }

inline StepMode parse_step_mode(std::string_view name) {
    if (name == "scaled") return StepMode::Scaled;
    if (name == "fixed") return StepMode::Fixed;
    throw DomainError("unknown step mode '" + std::string(name) + "' (expected scaled or fixed)");
}

/// Killing mechanism.
///  - OmegaClock: death when A_t = int omega(X_s) ds exceeds a unit exponential.
///  - ExcursionCoin: diagnostic variant; each negative excursion ends in
///    death with probability p, independently of the excursion path.
enum class KillingScheme { OmegaClock, ExcursionCoin };

inline std::string_view to_string(KillingScheme scheme) {
    return scheme == KillingScheme::OmegaClock ? "omega" : "coin";
}

inline KillingScheme parse_killing_scheme(std::string_view name) {
    if (name == "omega") return KillingScheme::OmegaClock;
    if (name == "coin") return KillingScheme::ExcursionCoin;
    throw DomainError("unknown killing scheme '" + std::string(name) + "' (expected omega or coin)");
}

struct PathConfig {
    double dt = 1e-3;
    double horizon = 200.0;
    std::uint64_t n_paths = 1;
    std::uint64_t seed = 0;
    double zero_band = 0.0;  ///< fixed mode only; 0 picks dt^{1/alpha}/10
    StepMode mode = StepMode::Scaled;
    KillingScheme killing = KillingScheme::OmegaClock;
    unsigned threads = 0;  ///< 0 = OMEGASTOP_THREADS or hardware concurrency
};

inline void validate(const PathConfig& c) {
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw DomainError("path config: dt must be positive");
    if (!(c.horizon >= c.dt) || !std::isfinite(c.horizon)) throw DomainError("path config: need dt <= horizon");
    if (c.n_paths < 1) throw DomainError("path config: n_paths must be at least 1");
    if (c.zero_band < 0.0 || !std::isfinite(c.zero_band)) throw DomainError("path config: zero_band must be >= 0");
}

/// Position of one path between steps.
struct PathState {
    double t = 0.0;  ///< real time
    double x = 0.0;
    double a = 0.0;  ///< additive functional A_t = int omega(X_s) ds
    bool alive = true;
    std::uint64_t steps = 0;
    int band_steps = 0;  ///< consecutive step ends inside (-zero_band, 0)
    std::optional<double> kill_time;
};

/// Euler stepping of the omega-killed stable process with per-step killing.
///
/// Killing is exact exponential thinning: a path survives a step with
/// probability exp(-dA), dA the trapezoid estimate of the increase of A over
/// the step. In scaled mode the rate seen in the Lamperti clock,
/// omega(x) |x|^alpha = k 1{x<0}, is bounded and no cap is needed. In fixed
/// mode omega is capped at omega(-zero_band) and a path that ends two
/// consecutive steps inside (-zero_band, 0) is killed, since A diverges on
/// the way to 0 from below.
class KilledPathStepper {
public:
    KilledPathStepper(const StableModel& m, const PathConfig& config)
        : sampler_(m.params()),
          alpha_(m.alpha()),
          k_(m.k()),
          clock_(clock_factor(m)),
          mode_(config.mode),
          killing_(config.killing),
          p_(m.p()),
          dt_(config.dt) {
        validate(config);
        unit_spread_ = std::pow(clock_ * dt_, 1.0 / alpha_);
        band_ = config.zero_band > 0.0 ? config.zero_band : std::pow(config.dt, 1.0 / alpha_) / 10.0;
        const double budget = std::ceil(config.horizon / config.dt - 1e-9);
        max_steps_ = mode_ == StepMode::Scaled ? static_cast<std::uint64_t>(budget)
                                               : std::numeric_limits<std::uint64_t>::max();
        t_max_ = mode_ == StepMode::Scaled ? std::numeric_limits<double>::infinity() : config.horizon;
    }

    static PathState start(double x0) {
        if (!std::isfinite(x0)) throw DomainError("simulate: starting point must be finite");
        PathState s;
        s.x = x0;
        // the self-similar process started at 0 stays there; treat it as sent to the cemetery
        if (x0 == 0.0) {
            s.alive = false;
            s.kill_time = 0.0;
        }
        return s;
    }

    /// True while the path may take another step without passing t_stop or
    /// the horizon.
    bool can_step(const PathState& s, double t_stop = std::numeric_limits<double>::infinity()) const {
        return s.alive && s.steps < max_steps_ && s.t < std::min(t_stop, t_max_);
    }

    /// Advances one step, never past t_stop. Draws exactly three uniforms.
    void step(PathState& s, PathRng& rng, double t_stop = std::numeric_limits<double>::infinity()) const {
        const double z = sampler_(rng);
        const double u_kill = rng.uniform();
        const double t_end = std::min(t_stop, t_max_);
        const double x0 = s.x;
        double dt_real, dt_norm, increment;
        bool clamped = false;
        if (mode_ == StepMode::Scaled) {
            const double scale = alpha_ == 1.0 ? std::abs(x0) : std::pow(std::abs(x0), alpha_);
            dt_norm = dt_;
            if (s.t + dt_norm * scale >= t_end) {
                dt_norm = (t_end - s.t) / scale;
                clamped = true;
            }
            dt_real = dt_norm * scale;
            const double spread = clamped ? std::pow(clock_ * dt_norm, 1.0 / alpha_) : unit_spread_;
            increment = std::abs(x0) * spread * z;
        } else {
            clamped = s.t + dt_ >= t_end;
            dt_real = clamped ? t_end - s.t : dt_;
            dt_norm = dt_real;
            increment = (clamped ? std::pow(clock_ * dt_real, 1.0 / alpha_) : unit_spread_) * z;
        }
        const double x1 = x0 + increment;
        ++s.steps;
        const double t0 = s.t;
        s.t = clamped ? t_end : t0 + dt_real;
        if (killing_ == KillingScheme::ExcursionCoin) {
            s.x = x1;
            if (x0 < 0.0 && x1 >= 0.0 && u_kill < p_) {
                s.alive = false;
                s.kill_time = s.t;
            }
            return;
        }
        const double da = hazard_normalised(x0, x1, dt_real, dt_norm);
        if (const auto frac = thinning(da, u_kill)) {
            s.a += da * *frac;
            s.x = x1;
            s.alive = false;
            s.kill_time = t0 + *frac * dt_real;
            return;
        }
        s.a += da;
        s.x = x1;
        if (x1 == 0.0) {
            s.alive = false;
            s.kill_time = s.t;
            return;
        }
        if (mode_ == StepMode::Fixed) {
            s.band_steps = (x1 < 0.0 && x1 > -band_) ? s.band_steps + 1 : 0;
            if (s.band_steps >= 2) {
                s.alive = false;
                s.kill_time = s.t;
            }
        }
    }

    /// Trapezoid estimate of the increase of A over a real-time step dt_real
    /// from x0 to x1.
    double hazard(double x0, double x1, double dt_real) const {
        const double dt_norm = mode_ == StepMode::Scaled ? dt_real / std::pow(std::abs(x0), alpha_) : dt_real;
        return hazard_normalised(x0, x1, dt_real, dt_norm);
    }

    /// Exponential thinning with uniform u: empty if the path survives an
    /// increase da of A, otherwise the fraction of the step elapsed at the
    /// kill (exact for a constant hazard).
    static std::optional<double> thinning(double da, double u) {
        if (!(da > 0.0) || !(u < -std::expm1(-da))) return std::nullopt;
        return std::min(1.0, -std::log1p(-u) / da);
    }

    double zero_band() const noexcept { return band_; }
    std::uint64_t max_steps() const noexcept { return max_steps_; }
    StepMode mode() const noexcept { return mode_; }

private:
    double hazard_normalised(double x0, double x1, double dt_real, double dt_norm) const {
        if (mode_ == StepMode::Scaled)
            return 0.5 * k_ * dt_norm * ((x0 < 0.0 ? 1.0 : 0.0) + (x1 < 0.0 ? 1.0 : 0.0));
        return 0.5 * dt_real * (capped_rate(x0) + capped_rate(x1));
    }

    double capped_rate(double x) const {
        if (x >= 0.0 || k_ == 0.0) return 0.0;
        return k_ * std::pow(std::max(-x, band_), -alpha_);
    }

    StableSampler sampler_;
    double alpha_;
    double k_;
    double clock_;
    StepMode mode_;
    KillingScheme killing_;
    double p_;
    double dt_;
    double unit_spread_ = 0.0;  // (clock * dt)^{1/alpha}
    double band_ = 0.0;
    std::uint64_t max_steps_ = 0;
    double t_max_ = 0.0;
};

/// Discretised trajectory of one path.
struct PathSample {
    std::vector<double> times;
    std::vector<double> states;
    std::vector<double> clock_value;  ///< A at each time
    std::vector<bool> alive;
    bool killed = false;
    std::optional<double> kill_time;
    bool censored = false;  ///< still alive when the horizon was reached
};

/// Simulates path `path_index` of the ensemble keyed by config.seed.
inline PathSample simulate_omega_killed_path(const PathConfig& config, const StableModel& m, double x0,
                                             std::uint64_t path_index = 0) {
    const KilledPathStepper stepper(m, config);
    PathRng rng(config.seed, path_index);
    PathState s = KilledPathStepper::start(x0);
    PathSample out;
    auto record = [&] {
        out.times.push_back(s.t);
        out.states.push_back(s.x);
        out.clock_value.push_back(s.a);
        out.alive.push_back(s.alive);
    };
    record();
    while (stepper.can_step(s)) {
        stepper.step(s, rng);
        record();
    }
    out.killed = !s.alive;
    out.kill_time = s.kill_time;
    out.censored = s.alive;
    return out;
}

/// The censored path: negative stretches are erased and the remaining
/// sections glued in time order. Only the states are kept.
inline std::vector<double> censored_states(const PathSample& path) {
    std::vector<double> out;
    for (std::size_t i = 0; i < path.states.size(); ++i) {
        if (!path.alive[i]) break;
        if (path.states[i] >= 0.0) out.push_back(path.states[i]);
    }
    return out;
}

/// Writes rows `path_id,t,x,a,alive`; the header is written when requested.
inline void write_path_csv(std::ostream& out, const PathSample& path, std::uint64_t path_id, bool header) {
    if (header) out << "path_id,t,x,a,alive\n";
    const auto old = out.precision(17);
    for (std::size_t i = 0; i < path.states.size(); ++i)
        out << path_id << ',' << path.times[i] << ',' << path.states[i] << ',' << path.clock_value[i] << ','
            << (path.alive[i] ? 1 : 0) << '\n';
    out.precision(old);
}

}  // namespace omegastop::sim
