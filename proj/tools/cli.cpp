#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "lrst/errors.hpp"
#include "lrst/gaussian_oracle.hpp"
#include "lrst/lrst_inference.hpp"
#include "lrst/power_design.hpp"
#include "lrst/sim_engine.hpp"
#include "lrst/trial_data.hpp"
#include "reports.hpp"

namespace lrst::cli {

namespace {

struct Options {
    std::string data;
    std::string scenario;
    double alpha = 0.05;
    double power = 0.8;
    std::optional<double> lambda;
    std::optional<double> n;
    std::size_t reps = 2000;
    std::optional<std::uint64_t> seed;
    std::string method = "mc";
    std::size_t mc_samples = 1'000'000;
    std::string out;
    std::string format = "json";
    bool null_scenario = false;
};

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::invalid_argument, msg); }

void add_output(CLI::App* cmd, Options& o) {
    cmd->add_option("--out", o.out, "Report path (default: stdout)");
    cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv-summary"}));
}

void add_alpha(CLI::App* cmd, Options& o) {
    cmd->add_option("--alpha", o.alpha, "One-sided significance level")->check(CLI::Range(0.0, 1.0));
}

void add_oracle(CLI::App* cmd, Options& o) {
    cmd->add_option("--method", o.method, "Oracle method")->check(CLI::IsMember({"mc", "quadrature"}));
    cmd->add_option("--mc-samples", o.mc_samples, "Monte Carlo draws for the oracle")->check(CLI::PositiveNumber);
}

OracleConfig oracle_config(const Options& o) {
    OracleConfig cfg;
    cfg.method = parse_oracle_method(o.method);
    cfg.mc_samples = o.mc_samples;
    if (cfg.method == OracleMethod::monte_carlo) {
        if (!o.seed) invalid("--seed is required for the Monte Carlo oracle");
        if (o.mc_samples < 10'000) invalid("--mc-samples must be at least 10000");
        cfg.seed = *o.seed;
    }
    return cfg;
}

GaussianScenario scenario_with_lambda(const Options& o) {
    auto s = load_scenario(o.scenario);
    if (o.lambda) {
        if (!(*o.lambda > 0.0)) invalid("--lambda must be positive");
        s.lambda = *o.lambda;
    }
    if (o.null_scenario) s = s.null_version();
    return s;
}

ordered_json oracle_inputs(const Options& o, const GaussianScenario& s) {
    ordered_json j = {{"scenario", o.scenario}, {"lambda", s.lambda}, {"method", o.method}};
    if (o.method == "mc") {
        j["mc_samples"] = o.mc_samples;
        j["seed"] = *o.seed;
    }
    return j;
}

std::size_t total_n(const Options& o) {
    if (!o.n) invalid("--n is required");
    if (!(*o.n >= 4.0) || *o.n != std::floor(*o.n)) invalid("--n must be an integer of at least 4");
    return static_cast<std::size_t>(*o.n);
}

void emit(const ordered_json& report, const Options& o, std::ostream& out) {
    const std::string text = o.format == "json" ? report.dump(2) + "\n" : csv_summary(report);
    if (o.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw Error(ErrorCode::io_error, "cannot write report '" + o.out + "'");
    f << text;
    if (!f) throw Error(ErrorCode::io_error, "failed writing report '" + o.out + "'");
}

ordered_json cmd_test(const Options& o) {
    const auto raw = parse_trial_csv_file(o.data);
    const auto [data, pruned] = validate_and_prune(raw);
    auto result = to_json(lrst_test(data, o.alpha));
    result["pruned"] = to_json(pruned);
    return make_report("test", {{"data", o.data}, {"alpha", o.alpha}}, std::move(result));
}

ordered_json cmd_power_estimated(const Options& o) {
    const auto raw = parse_trial_csv_file(o.data);
    const auto [data, pruned] = validate_and_prune(raw);
    ordered_json inputs = {{"data", o.data}, {"alpha", o.alpha}};
    std::optional<double> at_n;
    if (o.n) {
        at_n = static_cast<double>(total_n(o));
        inputs["n"] = *at_n;
    }
    auto result = to_json(estimated_power(data, o.alpha, at_n));
    if (result.contains("variance") && result.contains("N"))
        result["variance_printed_form"] = result["N"].get<double>() * result["variance"].get<double>();
    result["pruned"] = to_json(pruned);
    return make_report("power-estimated", std::move(inputs), std::move(result));
}

ordered_json cmd_power_theoretical(const Options& o) {
    const auto s = scenario_with_lambda(o);
    const auto cfg = oracle_config(o);
    const std::size_t N = total_n(o);
    const auto oracle = oracle_cd(s, cfg);
    auto result = to_json(theoretical_power(oracle.theta.theta_bar, oracle.C, oracle.D, s.lambda,
                                            static_cast<double>(N), oracle.visits(), o.alpha));
    result["C"] = to_json(oracle.C);
    result["D"] = to_json(oracle.D);
    auto inputs = oracle_inputs(o, s);
    inputs["n"] = N;
    inputs["alpha"] = o.alpha;
    return make_report("power-theoretical", std::move(inputs), std::move(result));
}

ordered_json cmd_samplesize(const Options& o) {
    const auto s = scenario_with_lambda(o);
    if (!(o.power > o.alpha && o.power < 1.0)) invalid("--power must lie in (alpha, 1)");
    const auto cfg = oracle_config(o);
    const auto oracle = oracle_cd(s, cfg);
    auto result = to_json(
        required_sample_size(oracle.theta.theta_bar, oracle.C, oracle.D, s.lambda, oracle.visits(), o.alpha, o.power));
    auto inputs = oracle_inputs(o, s);
    inputs["power"] = o.power;
    inputs["alpha"] = o.alpha;
    return make_report("samplesize", std::move(inputs), std::move(result));
}

SimConfig sim_config(const Options& o, const GaussianScenario& s) {
    if (!o.seed) invalid("--seed is required for simulations");
    if (o.reps < 1) invalid("--reps must be at least 1");
    const auto [n_x, n_y] = split_sample(total_n(o), s.lambda);
    SimConfig cfg;
    cfg.n_x = n_x;
    cfg.n_y = n_y;
    cfg.replicates = o.reps;
    cfg.alpha = o.alpha;
    cfg.seed = *o.seed;
    cfg.scenario = s;
    return cfg;
}

ordered_json sim_inputs(const Options& o, const SimConfig& cfg) {
    return {{"scenario", o.scenario}, {"null", o.null_scenario}, {"lambda", cfg.scenario.lambda},
            {"n", cfg.n_x + cfg.n_y}, {"n_x", cfg.n_x},         {"n_y", cfg.n_y},
            {"reps", cfg.replicates}, {"alpha", cfg.alpha},     {"seed", cfg.seed}};
}

ordered_json cmd_simulate_power(const Options& o) {
    const auto s = scenario_with_lambda(o);
    const auto cfg = sim_config(o, s);
    return make_report("simulate-power", sim_inputs(o, cfg), to_json(empirical_power(cfg)));
}

ordered_json cmd_simulate_validate(const Options& o) {
    const auto s = scenario_with_lambda(o);
    const auto cfg = sim_config(o, s);
    auto ocfg = oracle_config(o);
    const auto oracle = oracle_cd(s, ocfg);
    auto result = to_json(estimator_validation(cfg, oracle));
    result["oracle_C"] = to_json(oracle.C);
    result["oracle_D"] = to_json(oracle.D);
    auto inputs = sim_inputs(o, cfg);
    inputs["method"] = o.method;
    if (o.method == "mc") inputs["mc_samples"] = o.mc_samples;
    return make_report("simulate-validate", std::move(inputs), std::move(result));
}

ordered_json cmd_oracle(const Options& o) {
    const auto s = scenario_with_lambda(o);
    const auto cfg = oracle_config(o);
    return make_report("oracle", oracle_inputs(o, s), to_json(oracle_cd(s, cfg)));
}

ordered_json cmd_emit_scenario(const Options& o) {
    if (o.out.empty()) invalid("--out is required");
    std::filesystem::path path(o.out);
    if (std::filesystem::is_directory(path)) path /= "bapi302_scenario.json";
    save_scenario(bapi302_scenario(), path.string());
    return make_report("emit-scenario", {{"out", o.out}}, {{"path", path.string()}});
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Longitudinal rank sum test: inference, power and simulation", "lrst"};
    app.set_version_flag("--version", std::string(LRST_VERSION));
    app.require_subcommand(1);

    auto* test = app.add_subcommand("test", "Run the test on a long-format trial CSV");
    test->add_option("--data", o.data, "Trial CSV")->required();
    add_alpha(test, o);
    add_output(test, o);

    auto* pest = app.add_subcommand("power-estimated", "Estimated power and its variance from trial data");
    pest->add_option("--data", o.data, "Trial CSV")->required();
    pest->add_option("--n", o.n, "Evaluate at this total sample size");
    add_alpha(pest, o);
    add_output(pest, o);

    auto* pth = app.add_subcommand("power-theoretical", "Closed-form power from a scenario oracle");
    pth->add_option("--scenario", o.scenario, "Scenario JSON")->required();
    pth->add_option("--n", o.n, "Total sample size")->required();
    pth->add_option("--lambda", o.lambda, "Allocation ratio n_x / n_y (overrides the scenario)");
    pth->add_option("--seed", o.seed, "Oracle seed");
    add_alpha(pth, o);
    add_oracle(pth, o);
    add_output(pth, o);

    auto* ss = app.add_subcommand("samplesize", "Minimum sample size for a target power");
    ss->add_option("--scenario", o.scenario, "Scenario JSON")->required();
    ss->add_option("--power", o.power, "Target power")->required();
    ss->add_option("--lambda", o.lambda, "Allocation ratio n_x / n_y (overrides the scenario)");
    ss->add_option("--seed", o.seed, "Oracle seed");
    add_alpha(ss, o);
    add_oracle(ss, o);
    add_output(ss, o);

    auto* sp = app.add_subcommand("simulate-power", "Empirical and estimated power by simulation");
    sp->add_option("--scenario", o.scenario, "Scenario JSON")->required();
    sp->add_option("--n", o.n, "Total sample size")->required();
    sp->add_option("--reps", o.reps, "Replicates");
    sp->add_option("--seed", o.seed, "Master seed")->required();
    sp->add_option("--lambda", o.lambda, "Allocation ratio n_x / n_y (overrides the scenario)");
    sp->add_flag("--null", o.null_scenario, "Use control means for both arms");
    add_alpha(sp, o);
    add_output(sp, o);

    auto* sv = app.add_subcommand("simulate-validate", "Accuracy of the C and D estimators by simulation");
    sv->add_option("--scenario", o.scenario, "Scenario JSON")->required();
    sv->add_option("--n", o.n, "Total sample size")->required();
    sv->add_option("--reps", o.reps, "Replicates");
    sv->add_option("--seed", o.seed, "Master seed (also seeds the oracle)")->required();
    sv->add_option("--lambda", o.lambda, "Allocation ratio n_x / n_y (overrides the scenario)");
    add_alpha(sv, o);
    add_oracle(sv, o);
    add_output(sv, o);

    auto* orc = app.add_subcommand("oracle", "Population theta, C, D and placement moments");
    orc->add_option("--scenario", o.scenario, "Scenario JSON")->required();
    orc->add_option("--seed", o.seed, "Oracle seed");
    orc->add_option("--lambda", o.lambda, "Allocation ratio n_x / n_y (overrides the scenario)");
    add_oracle(orc, o);
    add_output(orc, o);

    auto* emit_cmd = app.add_subcommand("emit-scenario", "Write the bundled two-outcome scenario");
    emit_cmd->add_option("--out", o.out, "File or directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        ordered_json report;
        if (*test) report = cmd_test(o);
        else if (*pest) report = cmd_power_estimated(o);
        else if (*pth) report = cmd_power_theoretical(o);
        else if (*ss) report = cmd_samplesize(o);
        else if (*sp) report = cmd_simulate_power(o);
        else if (*sv) report = cmd_simulate_validate(o);
        else if (*orc) report = cmd_oracle(o);
        else if (*emit_cmd) {
            report = cmd_emit_scenario(o);
            out << report.dump(2) << "\n";
            return 0;
        }
        emit(report, o, out);
        return 0;
    } catch (const Error& e) {
        const ordered_json j = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
        err << j.dump() << "\n";
        return is_validation_error(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        const ordered_json j = {{"error", "RuntimeError"}, {"message", e.what()}};
        err << j.dump() << "\n";
        return 1;
    }
}

}  // namespace lrst::cli
