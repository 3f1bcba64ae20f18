#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "omegastop/errors.hpp"
#include "omegastop/levy.hpp"
#include "omegastop/model.hpp"
#include "omegastop/simulate/ensemble.hpp"
#include "omegastop/simulate/killed_path.hpp"

namespace omegastop::sim {

/// Upper bound on what a path still alive at the horizon, at state x, could
/// add to the estimate. Empty when no bound is known.
using ContinuationBound = std::function<double(double)>;

namespace detail {

inline std::string censor_note(std::uint64_t censored, std::uint64_t total, std::string_view what) {
    std::ostringstream s;
    s.precision(6);
    s << censored << " of " << total << " paths (" << 100.0 * static_cast<double>(censored) / static_cast<double>(total)
      << "%) were alive at the horizon; " << what;
    return s.str();
}

inline PathEnsembleReport base_report(const PathConfig& config, double x0) {
    PathEnsembleReport r;
    r.n_paths = config.n_paths;
    r.x0 = x0;
    r.config = config;
    return r;
}

}  // namespace detail

/// Fraction of paths killed during their first negative excursion. Paths
/// still inside the excursion at the horizon are left out of the ratio.
inline PathEnsembleReport estimate_killing_probability(const PathConfig& config, const StableModel& m,
                                                       double x0 = 1.0) {
    if (!(m.k() > 0.0)) throw DomainError("estimate_killing_probability: needs k > 0");
    const KilledPathStepper stepper(m, config);
    // columns: killed, resolved (killed or returned)
    const auto table = run_paths(config, 2, [&](std::uint64_t, PathRng& rng, double* row) {
        PathState s = KilledPathStepper::start(x0);
        bool excursion = s.x < 0.0;
        while (stepper.can_step(s)) {
            stepper.step(s, rng);
            if (!s.alive) {
                row[0] = 1.0;
                row[1] = 1.0;
                return;
            }
            if (s.x < 0.0) {
                excursion = true;
            } else if (excursion) {
                row[1] = 1.0;
                return;
            }
        }
    });
    const auto stats = column_stats(table, 0, 1);
    auto report = detail::base_report(config, x0);
    report.estimate = stats.mean;
    report.std_error = stats.std_error;
    report.n_effective = stats.count;
    report.n_censored = config.n_paths - stats.count;
    report.bias_notes = detail::censor_note(report.n_censored, config.n_paths, "they are excluded from the ratio");
    return report;
}

enum class PolicyDirection { UpCross, DownEntry };

inline std::string_view to_string(PolicyDirection d) { return d == PolicyDirection::UpCross ? "up-cross" : "down-entry"; }

/// Values of threshold rules from x0, one report per threshold, all computed
/// on the same paths (common random numbers). UpCross stops at the first
/// time X >= b, DownEntry at the first time 0 < X <= b. A path killed before
/// stopping pays 0; so does a path still undecided at the horizon, which
/// biases the estimate down by at most the reported bias_bound.
inline std::vector<PathEnsembleReport> estimate_policy_values(const PathConfig& config, const StableModel& m,
                                                              const GainSpec& gain, double x0,
                                                              const std::vector<double>& thresholds,
                                                              PolicyDirection direction,
                                                              const ContinuationBound& bound = {}) {
    if (thresholds.empty()) throw DomainError("estimate_policy_values: no thresholds given");
    for (double b : thresholds)
        if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("estimate_policy_values: thresholds must be positive");
    const std::size_t n = thresholds.size();
    const KilledPathStepper stepper(m, config);
    auto stops = [&](double x, double b) {
        return direction == PolicyDirection::UpCross ? x >= b : (x > 0.0 && x <= b);
    };
    // columns: value per threshold, then censored flag per threshold, then bias per threshold
    const auto table = run_paths(config, 3 * n, [&](std::uint64_t, PathRng& rng, double* row) {
        PathState s = KilledPathStepper::start(x0);
        std::size_t open = n;
        std::vector<char> done(n, 0);
        auto settle = [&] {
            for (std::size_t j = 0; j < n; ++j) {
                if (done[j] || !stops(s.x, thresholds[j])) continue;
                done[j] = 1;
                --open;
                row[j] = payoff(s.x, gain);
            }
        };
        if (s.alive) settle();
        while (open > 0 && stepper.can_step(s)) {
            stepper.step(s, rng);
            if (!s.alive) return;
            settle();
        }
        if (open > 0 && s.alive) {
            const double extra = bound ? bound(s.x) : 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (done[j]) continue;
                row[n + j] = 1.0;
                row[2 * n + j] = extra;
            }
        }
    });
    std::vector<PathEnsembleReport> out;
    for (std::size_t j = 0; j < n; ++j) {
        const auto stats = column_stats(table, j);
        auto report = detail::base_report(config, x0);
        report.estimate = stats.mean;
        report.std_error = stats.std_error;
        report.n_effective = stats.count;
        report.n_censored = static_cast<std::uint64_t>(std::llround(column_mean(table, n + j) * config.n_paths));
        report.bias_bound = column_mean(table, 2 * n + j);
        report.bias_notes = detail::censor_note(report.n_censored, config.n_paths,
                                                "they contribute 0, so the estimate is biased down");
        out.push_back(report);
    }
    return out;
}

inline PathEnsembleReport estimate_policy_value(const PathConfig& config, const StableModel& m, const GainSpec& gain,
                                                double x0, double threshold, PolicyDirection direction,
                                                const ContinuationBound& bound = {}) {
    return estimate_policy_values(config, m, gain, x0, {threshold}, direction, bound).front();
}

/// E_x[(sup of X over its lifetime)^r], usable as a continuation bound for
/// gains dominated by x^r: x^r m for x > 0, and for x < 0 the same after
/// the first passage above 0, (1-p) (-x)^r sin(pi a rho)/sin(pi(a rho - r)) m,
/// with m = kappa(q,0)/kappa(q,-r). Needs 0 < r < delta.
inline ContinuationBound sup_moment_bound(const StableModel& m, double r) {
    if (!(r > 0.0 && r < m.delta())) throw DomainError("sup_moment_bound: r must lie in (0, delta)");
    constexpr double pi = std::numbers::pi;
    const double factor = kappa(0.0, m) / kappa(-r, m);
    const double ar = m.alpha_rho();
    const double below = (1.0 - m.p()) * std::sin(pi * ar) / std::sin(pi * (ar - r)) * factor;
    return [=](double x) {
        if (x > 0.0) return std::pow(x, r) * factor;
        if (x < 0.0) return std::pow(-x, r) * below;
        return 0.0;
    };
}

/// Mean of (sup of the positive part of X over its lifetime)^r from x0.
/// The supremum of a path alive at the horizon is truncated there.
inline PathEnsembleReport estimate_sup_moment(const PathConfig& config, const StableModel& m, double r,
                                              double x0 = 1.0, const ContinuationBound& bound = {}) {
    if (!(r > 0.0)) throw DomainError("estimate_sup_moment: r must be positive");
    const KilledPathStepper stepper(m, config);
    // columns: sup^r, censored, bias
    const auto table = run_paths(config, 3, [&](std::uint64_t, PathRng& rng, double* row) {
        PathState s = KilledPathStepper::start(x0);
        double top = std::max(0.0, x0);
        while (stepper.can_step(s)) {
            stepper.step(s, rng);
            if (!s.alive) break;
            top = std::max(top, s.x);
        }
        row[0] = std::pow(top, r);
        if (s.alive) {
            row[1] = 1.0;
            row[2] = bound ? bound(s.x) : 0.0;
        }
    });
    const auto stats = column_stats(table, 0);
    auto report = detail::base_report(config, x0);
    report.estimate = stats.mean;
    report.std_error = stats.std_error;
    report.n_effective = stats.count;
    report.n_censored = static_cast<std::uint64_t>(std::llround(column_mean(table, 1) * config.n_paths));
    report.bias_bound = column_mean(table, 2);
    report.bias_notes =
        detail::censor_note(report.n_censored, config.n_paths, "their supremum is truncated at the horizon");
    return report;
}

/// E_x0[g(X_t) 1{alive at t}] for each t in `times` (real time), on common
/// paths. A path that exhausts the step budget before t contributes 0.
inline std::vector<PathEnsembleReport> estimate_fixed_time_values(const PathConfig& config, const StableModel& m,
                                                                  const GainSpec& gain, double x0,
                                                                  std::vector<double> times) {
    if (times.empty()) throw DomainError("estimate_fixed_time_values: no times given");
    std::sort(times.begin(), times.end());
    if (!(times.front() > 0.0) || !std::isfinite(times.back()))
        throw DomainError("estimate_fixed_time_values: times must be positive and finite");
    const std::size_t n = times.size();
    PathConfig cfg = config;
    if (cfg.mode == StepMode::Fixed) cfg.horizon = std::max(cfg.horizon, times.back());
    const KilledPathStepper stepper(m, cfg);
    // columns: value per time, censored flag per time
    const auto table = run_paths(cfg, 2 * n, [&](std::uint64_t, PathRng& rng, double* row) {
        PathState s = KilledPathStepper::start(x0);
        for (std::size_t j = 0; j < n; ++j) {
            while (stepper.can_step(s, times[j])) stepper.step(s, rng, times[j]);
            if (!s.alive) return;
            if (s.t < times[j]) {
                for (std::size_t i = j; i < n; ++i) row[n + i] = 1.0;
                return;
            }
            row[j] = payoff(s.x, gain);
        }
    });
    std::vector<PathEnsembleReport> out;
    for (std::size_t j = 0; j < n; ++j) {
        const auto stats = column_stats(table, j);
        auto report = detail::base_report(cfg, x0);
        report.estimate = stats.mean;
        report.std_error = stats.std_error;
        report.n_effective = stats.count;
        report.n_censored = static_cast<std::uint64_t>(std::llround(column_mean(table, n + j) * cfg.n_paths));
        report.bias_notes = detail::censor_note(report.n_censored, cfg.n_paths,
                                                "they ran out of step budget before t and contribute 0");
        out.push_back(report);
    }
    return out;
}

}  // namespace omegastop::sim
