#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "omegastop/errors.hpp"
#include "omegastop/simulate.hpp"

using namespace omegastop;
using namespace omegastop::sim;

namespace {

constexpr double pi = std::numbers::pi;

StableModel fixture() { return StableModel(1.0, 0.5, 1.0 / pi); }

PathConfig config(std::uint64_t n, double dt = 1e-2, double horizon = 200.0, std::uint64_t seed = 11) {
    PathConfig c;
    c.n_paths = n;
    c.dt = dt;
    c.horizon = horizon;
    c.seed = seed;
    c.threads = 1;
    return c;
}

// beta solving rho = 1/2 + arctan(beta tan(pi a/2))/(pi a), by bisection on [-1, 1]
double bisect_skewness(double alpha, double rho) {
    double lo = -1.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (skewness_to_rho(alpha, mid) < rho ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Kolmogorov-Smirnov statistic of a sample against Exp(rate)
double ks_exponential(std::vector<double> sample, double rate) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = -std::expm1(-rate * sample[i]);
        d = std::max({d, (i + 1.0) / n - f, f - i / n});
    }
    return d;
}

}  // namespace

TEST(Sampler, SkewnessRoundTrip) {
    for (double alpha : {0.2, 0.5, 0.9, 1.2, 1.5, 1.9}) {
        const double lo = alpha > 1.0 ? 1.0 - 1.0 / alpha : 0.0, hi = alpha > 1.0 ? 1.0 / alpha : 1.0;
        for (int i = 1; i < 10; ++i) {
            const double rho = lo + (hi - lo) * i / 10.0;
            const double beta = rho_to_skewness(validate_params(alpha, rho));
            EXPECT_LE(std::abs(beta), 1.0 + 1e-12);
            EXPECT_NEAR(skewness_to_rho(alpha, beta), rho, 1e-12);
        }
    }
    EXPECT_EQ(rho_to_skewness(validate_params(1.0, 0.5)), 0.0);
    EXPECT_NEAR(rho_to_skewness(validate_params(1.3, 0.5)), 0.0, 1e-15);
}

TEST(Sampler, SkewnessMatchesNumericalInversion) {
    const double beta = rho_to_skewness(validate_params(0.5, 0.6));
    EXPECT_NEAR(beta, bisect_skewness(0.5, 0.6), 1e-12);
    EXPECT_NEAR(beta, std::tan(pi * 0.05), 1e-14);
    EXPECT_THROW(skewness_to_rho(1.0, 0.2), DomainError);
}

TEST(Sampler, PositivityParameter) {
    // P(X_t >= 0) = rho, 1e6 draws
    for (const auto& m : {StableModel(0.5, 0.6, 1.0), StableModel(1.5, 0.6, 1.0), StableModel(0.7, 0.3, 1.0),
                          StableModel(1.8, 0.45, 1.0)}) {
        PathRng rng(3, 0);
        const int n = 1000000;
        int positive = 0;
        for (int i = 0; i < n; ++i) positive += sample_stable_increment(rng, 0.5, m) >= 0.0 ? 1 : 0;
        const double rho = m.rho();
        const double se = std::sqrt(rho * (1.0 - rho) / n);
        EXPECT_NEAR(positive / static_cast<double>(n), rho, 3.0 * se) << m.alpha() << ' ' << m.rho();
    }
}

TEST(Sampler, TailCountsMatchJumpIntensities) {
    // increments over a short step exceed a large level x at rate c x^{-alpha}/alpha per unit time
    for (const auto& m : {StableModel(1.5, 0.6, 1.0), StableModel(0.7, 0.3, 1.0), fixture()}) {
        PathRng rng(5, 1);
        const double dt = 1e-2;
        const int n = 1000000;
        const double total_time = n * dt;
        const double levels[] = {1.0, 2.0, 4.0};
        double up[3] = {}, down[3] = {};
        for (int i = 0; i < n; ++i) {
            const double z = sample_stable_increment(rng, dt, m);
            for (int j = 0; j < 3; ++j) {
                up[j] += z > levels[j] ? 1.0 : 0.0;
                down[j] += z < -levels[j] ? 1.0 : 0.0;
            }
        }
        for (int j = 0; j < 3; ++j) {
            const double tail = std::pow(levels[j], -m.alpha()) / m.alpha() * total_time;
            const double expect_up = m.c_plus() * tail, expect_down = m.c_minus() * tail;
            // Poisson noise plus a 5% allowance for the small-jump correction at finite dt
            EXPECT_NEAR(up[j], expect_up, 3.0 * std::sqrt(expect_up) + 0.05 * expect_up) << m.alpha() << ' ' << j;
            EXPECT_NEAR(down[j], expect_down, 3.0 * std::sqrt(expect_down) + 0.05 * expect_down)
                << m.alpha() << ' ' << j;
        }
        // log-log slope between the extreme levels
        const double slope = std::log(up[0] / up[2]) / std::log(levels[2] / levels[0]);
        EXPECT_NEAR(slope, m.alpha(), 0.1) << m.alpha();
    }
}

TEST(Sampler, CauchyIsSymmetric) {
    const StableModel m = fixture();
    EXPECT_NEAR(clock_factor(m), 1.0, 1e-15);
    PathRng rng(9, 2);
    const int n = 200000;
    double sign_sum = 0.0;
    int inside = 0;
    for (int i = 0; i < n; ++i) {
        const double z = sample_stable_increment(rng, 1.0, m);
        sign_sum += z > 0.0 ? 1.0 : -1.0;
        inside += std::abs(z) < 1.0 ? 1 : 0;
    }
    EXPECT_NEAR(sign_sum / n, 0.0, 3.0 / std::sqrt(n));
    // standard Cauchy: P(|Z| < 1) = 1/2
    EXPECT_NEAR(inside / static_cast<double>(n), 0.5, 3.0 * 0.5 / std::sqrt(n));
}

TEST(Sampler, RejectsBadStep) {
    PathRng rng(1, 1);
    EXPECT_THROW(sample_stable_increment(rng, 0.0, fixture()), DomainError);
}

TEST(KilledPath, KillTimeAtConstantStateIsExponential) {
    // a path held at x = -1 accumulates A at rate k; thinning must give Exp(k) kill times
    const double k = 0.7;
    for (StepMode mode : {StepMode::Fixed, StepMode::Scaled}) {
        const StableModel m(1.5, 0.5, k);
        PathConfig c = config(1, 0.05);
        c.mode = mode;
        const KilledPathStepper stepper(m, c);
        std::vector<double> kills;
        PathRng rng(21, 0);
        for (int i = 0; i < 4000; ++i) {
            double t = 0.0;
            for (;;) {
                const double da = stepper.hazard(-1.0, -1.0, c.dt);
                if (const auto frac = KilledPathStepper::thinning(da, rng.uniform())) {
                    kills.push_back(t + *frac * c.dt);
                    break;
                }
                t += c.dt;
            }
        }
        // 1% critical value of the one-sample KS statistic
        EXPECT_LT(ks_exponential(kills, k) * std::sqrt(kills.size()), 1.63);
        // against a wrong rate the statistic must be large
        EXPECT_GT(ks_exponential(kills, 1.2 * k) * std::sqrt(kills.size()), 1.63);
    }
}

TEST(KilledPath, ThinningEdgeCases) {
    EXPECT_FALSE(KilledPathStepper::thinning(0.0, 1e-300).has_value());
    EXPECT_FALSE(KilledPathStepper::thinning(0.1, 0.2).has_value());
    ASSERT_TRUE(KilledPathStepper::thinning(0.1, 0.05).has_value());
    EXPECT_NEAR(*KilledPathStepper::thinning(0.1, 0.05), -std::log1p(-0.05) / 0.1, 1e-15);
}

TEST(KilledPath, NoKillingWithoutClock) {
    const StableModel m(1.0, 0.5, 0.0);
    for (StepMode mode : {StepMode::Scaled, StepMode::Fixed}) {
        PathConfig c = config(1, 1e-2, 20.0);
        c.mode = mode;
        for (std::uint64_t i = 0; i < 100; ++i) {
            const auto path = simulate_omega_killed_path(c, m, 1.0, i);
            EXPECT_FALSE(path.killed);
            EXPECT_TRUE(path.censored);
            EXPECT_EQ(path.clock_value.back(), 0.0);
        }
    }
}

TEST(KilledPath, ClockGrowsOnlyBelowZero) {
    const StableModel m = fixture();
    for (StepMode mode : {StepMode::Scaled, StepMode::Fixed}) {
        PathConfig c = config(1, 1e-2, 50.0);
        c.mode = mode;
        for (std::uint64_t i = 0; i < 200; ++i) {
            const auto path = simulate_omega_killed_path(c, m, 1.0, i);
            bool ever_negative = false;
            for (std::size_t j = 1; j < path.states.size(); ++j) {
                EXPECT_GE(path.clock_value[j], path.clock_value[j - 1]);
                EXPECT_GE(path.times[j], path.times[j - 1]);
                if (path.states[j - 1] >= 0.0 && path.states[j] >= 0.0)
                    EXPECT_EQ(path.clock_value[j], path.clock_value[j - 1]);
                ever_negative = ever_negative || path.states[j] < 0.0;
            }
            if (!ever_negative) EXPECT_EQ(path.clock_value.back(), 0.0);
            if (path.killed) {
                ASSERT_TRUE(path.kill_time.has_value());
                EXPECT_LE(*path.kill_time, path.times.back());
                EXPECT_FALSE(path.alive.back());
            }
        }
    }
}

TEST(KilledPath, StartAtZeroIsAbsorbed) {
    const auto path = simulate_omega_killed_path(config(1), fixture(), 0.0);
    EXPECT_TRUE(path.killed);
    EXPECT_EQ(path.states.size(), 1u);
    EXPECT_THROW(simulate_omega_killed_path(config(1), fixture(), NAN), DomainError);
}

TEST(KilledPath, CensoredPathKeepsPositiveSupremum) {
    // the sup over the positive sections of the killed path is the sup of the censored path
    const StableModel m(1.5, 0.6, 1.0);
    const PathConfig c = config(1, 1e-2, 50.0);
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto path = simulate_omega_killed_path(c, m, 1.0, i);
        const auto glued = censored_states(path);
        double top = 0.0;
        std::size_t positive = 0;
        for (std::size_t j = 0; j < path.states.size() && path.alive[j]; ++j) {
            if (path.states[j] < 0.0) continue;
            top = std::max(top, path.states[j]);
            ++positive;
        }
        ASSERT_FALSE(glued.empty());
        EXPECT_EQ(*std::max_element(glued.begin(), glued.end()), top);
        EXPECT_EQ(glued.size(), positive);
        for (double y : glued) EXPECT_GE(y, 0.0);
    }
}

TEST(KilledPath, ConfigValidation) {
    PathConfig c = config(1);
    c.dt = 0.0;
    EXPECT_THROW(validate(c), DomainError);
    c = config(1, 1.0, 0.5);
    EXPECT_THROW(validate(c), DomainError);
    c = config(0);
    EXPECT_THROW(validate(c), DomainError);
    EXPECT_THROW(parse_step_mode("bogus"), DomainError);
    EXPECT_THROW(parse_killing_scheme("bogus"), DomainError);
    EXPECT_EQ(parse_killing_scheme("coin"), KillingScheme::ExcursionCoin);
    EXPECT_EQ(parse_step_mode("fixed"), StepMode::Fixed);
}

TEST(KilledPath, CsvDump) {
    const auto path = simulate_omega_killed_path(config(1, 0.1, 2.0), fixture(), 1.0, 4);
    std::ostringstream out;
    write_path_csv(out, path, 4, true);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "path_id,t,x,a,alive");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        EXPECT_EQ(line.rfind("4,", 0), 0u);
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4);
        ++rows;
    }
    EXPECT_EQ(rows, path.states.size());
}

TEST(Estimators, KillingProbabilityOnFixture) {
    const auto r = estimate_killing_probability(config(4000, 1e-3), fixture());
    EXPECT_NEAR(r.estimate, 0.5, 3.0 * r.std_error);
    EXPECT_GT(r.std_error, 0.0);
    EXPECT_LE(r.n_censored, r.n_paths / 100);
    EXPECT_EQ(r.n_effective + r.n_censored, r.n_paths);
}

TEST(Estimators, KillingProbabilitySmallKilling) {
    const StableModel m(1.0, 0.5, 1e-4);
    const auto r = estimate_killing_probability(config(4000, 1e-2), m);
    EXPECT_LE(std::abs(r.estimate - m.p()), 3.0 * std::max(r.std_error, std::sqrt(m.p() / r.n_effective)));
    EXPECT_THROW(estimate_killing_probability(config(10), StableModel(1.0, 0.5, 0.0)), DomainError);
}

TEST(Estimators, StandardErrorShrinksWithPaths) {
    const auto a = estimate_killing_probability(config(1500, 1e-2, 200.0, 1), fixture());
    const auto b = estimate_killing_probability(config(3000, 1e-2, 200.0, 2), fixture());
    EXPECT_NEAR(b.std_error / a.std_error, 1.0 / std::sqrt(2.0), 0.08);
}

TEST(Estimators, CoinSchemeReproducesKillingProbability) {
    for (const auto& m : {fixture(), StableModel(1.5, 0.6, 1.0)}) {
        PathConfig c = config(3000, 1e-2);
        c.killing = KillingScheme::ExcursionCoin;
        const auto r = estimate_killing_probability(c, m);
        EXPECT_NEAR(r.estimate, m.p(), 3.0 * r.std_error) << m.alpha();
    }
}

TEST(Estimators, CoinKillsOnlyAtReturnSteps) {
    PathConfig c = config(1, 1e-2, 50.0);
    c.killing = KillingScheme::ExcursionCoin;
    int kills = 0;
    for (std::uint64_t i = 0; i < 300; ++i) {
        const auto path = simulate_omega_killed_path(c, fixture(), 1.0, i);
        EXPECT_EQ(path.clock_value.back(), 0.0);
        if (!path.killed) continue;
        ++kills;
        const std::size_t last = path.states.size() - 1;
        ASSERT_GE(last, 1u);
        EXPECT_LT(path.states[last - 1], 0.0);
        EXPECT_GE(path.states[last], 0.0);
    }
    EXPECT_GT(kills, 0);
}

TEST(Estimators, ThresholdBelowStartStopsImmediately) {
    const GainSpec gain = make_gain(0.1, 1.0);
    const auto r = estimate_policy_value(config(50), fixture(), gain, 3.0, 2.0, PolicyDirection::UpCross);
    EXPECT_DOUBLE_EQ(r.estimate, payoff(3.0, gain));
    EXPECT_LT(r.std_error, 1e-15);
    const auto put = estimate_policy_value(config(50), fixture(), make_gain(-0.15, 1.0), 0.01, 0.02,
                                           PolicyDirection::DownEntry);
    EXPECT_DOUBLE_EQ(put.estimate, payoff(0.01, make_gain(-0.15, 1.0)));
    EXPECT_THROW(estimate_policy_values(config(5), fixture(), gain, 1.0, {}, PolicyDirection::UpCross), DomainError);
    EXPECT_THROW(estimate_policy_value(config(5), fixture(), gain, 1.0, -1.0, PolicyDirection::UpCross), DomainError);
}

TEST(Estimators, CommonRandomNumbersAcrossThresholds) {
    // a grid run reproduces the single-threshold runs exactly
    const GainSpec gain = make_gain(0.1, 1.0);
    const PathConfig c = config(200, 1e-2, 50.0);
    const std::vector<double> grid{5.0, 20.0};
    const auto both = estimate_policy_values(c, fixture(), gain, 1.0, grid, PolicyDirection::UpCross);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto one = estimate_policy_value(c, fixture(), gain, 1.0, grid[j], PolicyDirection::UpCross);
        EXPECT_EQ(both[j].estimate, one.estimate);
        EXPECT_EQ(both[j].std_error, one.std_error);
    }
}

TEST(Estimators, DeterministicAcrossThreadCounts) {
    const GainSpec gain = make_gain(0.1, 1.0);
    PathConfig c = config(300, 1e-2, 50.0, 99);
    std::vector<PathEnsembleReport> runs;
    std::vector<PathEnsembleReport> p_runs;
    for (unsigned threads : {1u, 2u, 5u}) {
        c.threads = threads;
        runs.push_back(estimate_policy_value(c, fixture(), gain, 1.0, 41.0, PolicyDirection::UpCross,
                                             sup_moment_bound(fixture(), 0.1)));
        p_runs.push_back(estimate_killing_probability(c, fixture()));
    }
    for (std::size_t i = 1; i < runs.size(); ++i) {
        EXPECT_EQ(runs[i].estimate, runs[0].estimate);
        EXPECT_EQ(runs[i].std_error, runs[0].std_error);
        EXPECT_EQ(runs[i].bias_bound, runs[0].bias_bound);
        EXPECT_EQ(p_runs[i].estimate, p_runs[0].estimate);
    }
}

TEST(Estimators, SupMomentFromOne) {
    const StableModel m = fixture();
    const PathConfig c = config(300, 1e-2, 50.0);
    const auto r = estimate_sup_moment(c, m, 0.1);
    EXPECT_GE(r.estimate, 1.0);
    const auto tiny = estimate_sup_moment(c, m, 1e-6);
    EXPECT_GE(tiny.estimate, 1.0);
    EXPECT_NEAR(tiny.estimate, 1.0, 1e-4);
    EXPECT_THROW(estimate_sup_moment(c, m, 0.0), DomainError);
    EXPECT_THROW(sup_moment_bound(m, 0.3), DomainError);
}

TEST(Estimators, SupMomentBoundShape) {
    const StableModel m = fixture();
    const auto bound = sup_moment_bound(m, 0.1);
    const double factor = kappa(0.0, m) / kappa(-0.1, m);
    EXPECT_NEAR(bound(1.0), factor, 1e-15);
    EXPECT_NEAR(bound(32.0), std::pow(32.0, 0.1) * factor, 1e-13);
    EXPECT_NEAR(bound(-1.0), 0.5 / std::sin(0.4 * pi) * factor, 1e-13);
    EXPECT_EQ(bound(0.0), 0.0);
}

TEST(Estimators, FixedTimeValues) {
    const GainSpec gain = make_gain(0.3, 1.0);
    PathConfig c = config(200, 1e-2, 1e4);
    const auto r = estimate_fixed_time_values(c, fixture(), gain, 1.0, {10.0, 1.0});
    ASSERT_EQ(r.size(), 2u);
    for (const auto& e : r) {
        EXPECT_GE(e.estimate, 0.0);
        EXPECT_EQ(e.n_censored, 0u);
    }
    EXPECT_THROW(estimate_fixed_time_values(c, fixture(), gain, 1.0, {}), DomainError);
    EXPECT_THROW(estimate_fixed_time_values(c, fixture(), gain, 1.0, {-1.0}), DomainError);
}

TEST(Estimators, ThreadResolution) {
    EXPECT_EQ(resolve_threads(3), 3u);
    EXPECT_GE(resolve_threads(0), 1u);
}
