#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "omegastop/errors.hpp"
#include "omegastop/levy.hpp"
#include "omegastop/model.hpp"
#include "omegastop/simulate.hpp"
#include "omegastop/stopping.hpp"
#include "omegastop/version.hpp"

namespace omegastop::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUser = 2;
inline constexpr int kExitNumeric = 3;

/// Raised for flag combinations that parse but make no sense together.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Finite values as numbers, infinities as the strings "infinite" and
/// "-infinite". NaN never reaches a report.
inline json number(double v) {
    if (std::isnan(v)) throw NumericError("non-finite value in report");
    if (std::isinf(v)) return v > 0 ? json("infinite") : json("-infinite");
    return json(v);
}

inline json model_json(const StableModel& m) {
    return {{"alpha", m.alpha()}, {"rho", m.rho()},   {"k", m.k()},         {"c_plus", m.c_plus()},
            {"c_minus", m.c_minus()}, {"p", m.p()}, {"delta", m.delta()}, {"q", m.q()}};
}

struct ModelFlags {
    double alpha = 0.0;
    double rho = 0.0;
    double k = 0.0;

    void attach(CLI::App& app) {
        app.add_option("--alpha", alpha, "stability index")->required();
        app.add_option("--rho", rho, "positivity parameter")->required();
        app.add_option("--k", k, "killing coefficient, omega(x) = k(-x)^-alpha")->required();
    }

    StableModel build() const { return StableModel(alpha, rho, k); }
};

struct SimulateFlags {
    std::string mode;
    std::optional<double> r;
    double strike = 1.0;
    double x0 = 1.0;
    std::uint64_t n = 10000;
    double dt = 1e-3;
    double horizon = 200.0;
    std::uint64_t seed = 0;
    std::vector<double> thresholds;
    std::vector<double> times;
    std::string dump;
    std::uint64_t dump_paths = 10;
    unsigned threads = 0;
    std::string step = "scaled";
    std::string killing = "omega";
    double zero_band = 0.0;
};

namespace detail {

inline sim::PathConfig path_config(const SimulateFlags& f) {
    sim::PathConfig c;
    c.dt = f.dt;
    c.horizon = f.horizon;
    c.n_paths = f.n;
    c.seed = f.seed;
    c.zero_band = f.zero_band;
    c.mode = sim::parse_step_mode(f.step);
    c.killing = sim::parse_killing_scheme(f.killing);
    c.threads = f.threads;
    return c;
}

inline json config_json(const sim::PathConfig& c) {
    return {{"dt", c.dt},
            {"horizon", c.horizon},
            {"n_paths", c.n_paths},
            {"seed", c.seed},
            {"step", std::string(sim::to_string(c.mode))},
            {"killing", std::string(sim::to_string(c.killing))},
            {"zero_band", c.zero_band},
            {"threads", sim::resolve_threads(c.threads)}};
}

inline json estimate_json(const sim::PathEnsembleReport& rep, std::optional<double> comparator) {
    json out = {{"estimate", number(rep.estimate)}, {"std_error", number(rep.std_error)}};
    if (comparator) {
        out["comparator"] = number(*comparator);
        if (std::isfinite(*comparator)) {
            const double diff = rep.estimate - *comparator;
            const double z = rep.std_error > 0.0 ? diff / rep.std_error
                                                 : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
            out["z_score"] = number(z);
        } else {
            out["z_score"] = nullptr;
        }
    } else {
        out["comparator"] = nullptr;
        out["z_score"] = nullptr;
    }
    return out;
}

inline json diagnostics_json(const sim::PathEnsembleReport& rep) {
    return {{"n_effective", rep.n_effective}, {"n_censored", rep.n_censored}, {"bias_bound", number(rep.bias_bound)},
            {"bias_notes", rep.bias_notes}};
}

inline GainSpec require_gain(const SimulateFlags& f) {
    if (!f.r) throw UsageError("--mode " + f.mode + " needs --r");
    return make_gain(*f.r, f.strike);
}

inline void dump_paths(const SimulateFlags& f, const sim::PathConfig& config, const StableModel& m) {
    std::ofstream out(f.dump);
    if (!out) throw UsageError("cannot open dump file '" + f.dump + "'");
    const std::uint64_t count = std::min(f.dump_paths, config.n_paths);
    for (std::uint64_t i = 0; i < count; ++i)
        sim::write_path_csv(out, sim::simulate_omega_killed_path(config, m, f.x0, i), i, i == 0);
}

inline json cmd_model(const StableModel& m) {
    return {{"delta_residual", m.delta_residual()},
            {"delta_hat", m.delta_hat()},
            {"q_from_factors", q_from_factors(m.params(), m.delta())},
            {"q_from_killing", q_from_killing(m.params(), m.clock())}};
}

inline json cmd_solve(const StableModel& m, double r, double strike, const std::vector<double>& xs) {
    const GainSpec gain = make_gain(r, strike);
    const Regime regime = classify_regime(m, gain);
    if (regime == Regime::Boundary)
        throw RegimeError(
            "r sits on a regime boundary (r = delta or r = -(delta+1-alpha)); the value there is not covered by the "
            "closed form");
    const StoppingSolution sol(m, gain);
    json out = {{"regime", std::string(to_string(regime))}, {"r", r}, {"strike", strike}};
    if (sol.finite()) {
        out["b_star"] = *sol.b_star();
        out["mgf_factor"] = *sol.mgf_factor();
        out["stopping_set"] = regime == Regime::CallFinite ? "[b_star, inf)" : "(0, 1/b_star]";
    } else {
        out["b_star"] = "infinite";
        out["mgf_factor"] = "infinite";
        out["stopping_set"] = nullptr;
    }
    json values = json::array();
    for (double x : xs) {
        json entry = {{"x", x}, {"v", number(sol.value(x))}, {"payoff", number(payoff(x, gain))}};
        entry["stop"] = sol.finite() ? json(sol.in_stopping_set(x)) : json(nullptr);
        values.push_back(entry);
    }
    out["values"] = values;
    return out;
}

struct SimulateResult {
    json result;
    json diagnostics;
};

inline SimulateResult cmd_simulate(const StableModel& m, const SimulateFlags& f) {
    const sim::PathConfig config = path_config(f);
    sim::validate(config);
    if (!std::isfinite(f.x0)) throw UsageError("--x0 must be finite");
    if (!f.thresholds.empty() && f.mode != "policy") throw UsageError("--threshold only applies to --mode policy");
    if (!f.times.empty() && f.mode != "value") throw UsageError("--time only applies to --mode value");

    SimulateResult out;
    out.diagnostics["config"] = config_json(config);
    out.diagnostics["x0"] = f.x0;

    if (f.mode == "p") {
        if (f.r) throw UsageError("--mode p takes no --r");
        if (!(m.k() > 0.0)) throw UsageError("--mode p needs k > 0");
        const auto rep = sim::estimate_killing_probability(config, m, f.x0);
        out.result = estimate_json(rep, m.p());
        out.diagnostics.update(diagnostics_json(rep));
    } else if (f.mode == "policy") {
        const GainSpec gain = require_gain(f);
        const Regime regime = classify_regime(m, gain);
        const auto direction = gain.r > 0.0 ? sim::PolicyDirection::UpCross : sim::PolicyDirection::DownEntry;
        std::vector<double> thresholds = f.thresholds;
        std::optional<double> optimal;
        std::optional<StoppingSolution> sol;
        if (regime == Regime::CallFinite || regime == Regime::PutFinite) {
            sol.emplace(m, gain);
            optimal = direction == sim::PolicyDirection::UpCross ? *sol->b_star() : 1.0 / *sol->b_star();
        }
        if (thresholds.empty()) {
            if (!optimal) throw UsageError("no optimal threshold in regime " + std::string(to_string(regime)) +
                                           "; pass --threshold");
            thresholds.push_back(*optimal);
        }
        sim::ContinuationBound bound;
        if (regime == Regime::CallFinite) bound = sim::sup_moment_bound(m, gain.r);
        const auto reps = sim::estimate_policy_values(config, m, gain, f.x0, thresholds, direction, bound);
        std::optional<double> comparator;
        if (sol) comparator = sol->value(f.x0);
        else if (regime == Regime::InfiniteValue) comparator = INFINITY;
        json list = json::array();
        json diag = json::array();
        for (std::size_t j = 0; j < reps.size(); ++j) {
            json e = estimate_json(reps[j], comparator);
            e["threshold"] = thresholds[j];
            list.push_back(e);
            json d = diagnostics_json(reps[j]);
            d["threshold"] = thresholds[j];
            diag.push_back(d);
        }
        out.result = reps.size() == 1 ? list.front() : json{{"policies", list}};
        out.result["regime"] = std::string(to_string(regime));
        out.result["direction"] = std::string(sim::to_string(direction));
        if (optimal) out.result["optimal_threshold"] = *optimal;
        out.diagnostics["policies"] = diag;
        out.diagnostics["comparator_meaning"] =
            "closed-form optimal value v(x0); a threshold rule other than the optimal one should not exceed it";
    } else if (f.mode == "value") {
        const GainSpec gain = require_gain(f);
        const Regime regime = classify_regime(m, gain);
        std::vector<double> times = f.times.empty() ? std::vector<double>{1.0, 10.0, 100.0} : f.times;
        const auto reps = sim::estimate_fixed_time_values(config, m, gain, f.x0, times);
        std::sort(times.begin(), times.end());
        std::optional<double> comparator;
        if (regime == Regime::CallFinite || regime == Regime::PutFinite) comparator = solve(m, gain).value(f.x0);
        else if (regime == Regime::InfiniteValue) comparator = INFINITY;
        json list = json::array();
        json diag = json::array();
        for (std::size_t j = 0; j < reps.size(); ++j) {
            json e = estimate_json(reps[j], comparator);
            e["time"] = times[j];
            list.push_back(e);
            json d = diagnostics_json(reps[j]);
            d["time"] = times[j];
            diag.push_back(d);
        }
        out.result = {{"regime", std::string(to_string(regime))}, {"stopping_times", list}};
        out.diagnostics["stopping_times"] = diag;
        out.diagnostics["comparator_meaning"] = "closed-form optimal value v(x0), an upper bound for every rule";
    } else if (f.mode == "supmoment") {
        const GainSpec gain = require_gain(f);
        if (!(gain.r > 0.0)) throw UsageError("--mode supmoment needs r > 0");
        std::optional<double> comparator;
        sim::ContinuationBound bound;
        if (m.k() > 0.0 && gain.r < m.delta()) {
            bound = sim::sup_moment_bound(m, gain.r);
            comparator = bound(f.x0);
        } else {
            comparator = INFINITY;
        }
        const auto rep = sim::estimate_sup_moment(config, m, gain.r, f.x0, bound);
        out.result = estimate_json(rep, comparator);
        out.diagnostics.update(diagnostics_json(rep));
    } else {
        throw UsageError("unknown --mode '" + f.mode + "' (expected p, policy, value or supmoment)");
    }
    if (!f.dump.empty()) {
        dump_paths(f, config, m);
        out.diagnostics["dump"] = {{"path", f.dump}, {"paths", std::min(f.dump_paths, config.n_paths)}};
    }
    return out;
}

}  // namespace detail

/// Runs the command line; the report goes to `out`, messages to `err`.
/// Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Optimal stopping for omega-killed stable processes", "omegastop"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    ModelFlags model_flags;
    double r = 0.0, strike = 1.0;
    std::vector<double> xs;
    SimulateFlags sim_flags;

    auto* model_cmd = app.add_subcommand("model", "model constants c+, c-, p, delta, q");
    model_flags.attach(*model_cmd);

    auto* solve_cmd = app.add_subcommand("solve", "regime, threshold and value function");
    model_flags.attach(*solve_cmd);
    solve_cmd->add_option("--r", r, "payoff exponent (nonzero)")->required();
    solve_cmd->add_option("--strike", strike, "strike K > 0")->capture_default_str();
    solve_cmd->add_option("--x", xs, "points at which to evaluate v");

    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo checks of the closed forms");
    model_flags.attach(*sim_cmd);
    sim_cmd->add_option("--mode", sim_flags.mode, "p, policy, value or supmoment")->required();
    sim_cmd->add_option("--r", sim_flags.r, "payoff exponent");
    sim_cmd->add_option("--strike", sim_flags.strike, "strike K > 0")->capture_default_str();
    sim_cmd->add_option("--x0", sim_flags.x0, "starting point")->capture_default_str();
    sim_cmd->add_option("--n", sim_flags.n, "number of paths")->capture_default_str();
    sim_cmd->add_option("--dt", sim_flags.dt, "time step")->capture_default_str();
    sim_cmd->add_option("--horizon", sim_flags.horizon, "simulation horizon")->capture_default_str();
    sim_cmd->add_option("--seed", sim_flags.seed, "random seed")->capture_default_str();
    sim_cmd->add_option("--threshold", sim_flags.thresholds, "policy thresholds (shared random numbers)");
    sim_cmd->add_option("--time", sim_flags.times, "deterministic stopping times for --mode value");
    sim_cmd->add_option("--dump", sim_flags.dump, "write the first paths as CSV to this file");
    sim_cmd->add_option("--dump-paths", sim_flags.dump_paths, "number of paths to dump")->capture_default_str();
    sim_cmd->add_option("--threads", sim_flags.threads, "worker threads, 0 = auto")->capture_default_str();
    sim_cmd->add_option("--step", sim_flags.step, "time grid: scaled or fixed")->capture_default_str();
    sim_cmd->add_option("--killing", sim_flags.killing, "killing scheme: omega or coin")->capture_default_str();
    sim_cmd->add_option("--zero-band", sim_flags.zero_band, "fixed step only; 0 = dt^(1/alpha)/10")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUser;
    }

    const auto started = std::chrono::steady_clock::now();
    try {
        const StableModel m = model_flags.build();
        json report;
        report["version"] = kVersion;
        report["model"] = model_json(m);
        if (model_cmd->parsed()) {
            report["command"] = {{"name", "model"}, {"alpha", m.alpha()}, {"rho", m.rho()}, {"k", m.k()}};
            report["result"] = detail::cmd_model(m);
            report["diagnostics"] = json::object();
        } else if (solve_cmd->parsed()) {
            report["command"] = {{"name", "solve"}, {"alpha", m.alpha()}, {"rho", m.rho()}, {"k", m.k()},
                                 {"r", r},         {"strike", strike},    {"x", xs}};
            report["result"] = detail::cmd_solve(m, r, strike, xs);
            report["diagnostics"] = json::object();
        } else {
            report["command"] = {{"name", "simulate"}, {"mode", sim_flags.mode}, {"alpha", m.alpha()},
                                 {"rho", m.rho()},     {"k", m.k()}};
            if (sim_flags.r) report["command"]["r"] = *sim_flags.r;
            auto res = detail::cmd_simulate(m, sim_flags);
            report["result"] = std::move(res.result);
            report["diagnostics"] = std::move(res.diagnostics);
        }
        const auto elapsed = std::chrono::steady_clock::now() - started;
        report["wall_ms"] = std::chrono::duration<double, std::milli>(elapsed).count();
        out << report.dump(2) << '\n';
        return kExitOk;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUser;
    }
}

}  // namespace omegastop::cli
