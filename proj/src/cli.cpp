#include "ensamp/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ensamp/config.hpp"
#include "ensamp/harness.hpp"
#include "ensamp/stats.hpp"
#include "ensamp/verify.hpp"

namespace ensamp {

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> realizations;
    std::optional<std::size_t> threads;
    std::string out;
};

void add_overrides(CLI::App& cmd, Overrides& o) {
    cmd.add_option("--seed", o.seed, "Base seed (overrides run.seed)");
    cmd.add_option("--realizations", o.realizations, "Number of realizations (overrides run.realizations)")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--threads", o.threads, "Worker threads, 0 = hardware concurrency (overrides run.threads)");
    cmd.add_option("--out", o.out, "Output directory (overrides run.output)");
}

ExperimentConfig load_with_overrides(const std::string& path, const Overrides& o) {
    ExperimentConfig config = load_config(path);
    if (o.seed) config.run.seed = *o.seed;
    if (o.realizations) config.run.realizations = *o.realizations;
    if (o.threads) config.run.threads = *o.threads;
    if (!o.out.empty()) config.run.output = o.out;
    validate(config);
    return config;
}

std::filesystem::path output_dir(const ExperimentConfig& config) {
    if (!config.run.output.empty()) return config.run.output;
    if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
    return "results";
}

int cmd_run(const std::string& path, const Overrides& o, std::ostream& out) {
    const ExperimentConfig config = load_with_overrides(path, o);
    const auto dir = output_dir(config);
    const ExperimentResult result = run_experiment(config, dir);
    out << "wrote " << (dir / "traces.csv").string() << ", " << (dir / "summary.csv").string() << '\n';
    for (const auto& agent : result.agents) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-20s cumulative regret %.4f +- %.4f\n", agent.name.c_str(),
                      agent.summary.cumulative_mean, agent.summary.cumulative_stderr);
        out << buf;
    }
    return kExitOk;
}

struct MinModelsArgs {
    double eps = 0.03;
    std::vector<std::size_t> grid{1, 2, 4, 8, 16, 32, 64, 128, 256};
    std::optional<std::size_t> trailing_window;
    bool exhaustive = false;
};

int cmd_min_models(const std::string& path, const Overrides& o, const MinModelsArgs& args, std::ostream& out) {
    const ExperimentConfig config = load_with_overrides(path, o);
    MinModelsOptions options;
    options.eps_target = args.eps;
    options.grid = args.grid;
    options.trailing_window = args.trailing_window.value_or(config.run.trailing_window);
    options.exhaustive = args.exhaustive;
    options.threads = config.run.threads;
    const MinModelsResult result = min_models_search(config, options);

    nlohmann::json doc = {
        {"eps_target", options.eps_target},
        {"horizon", config.run.horizon},
        {"realizations", config.run.realizations},
        {"trailing_window", result.trailing_window},
        {"estimator", "mean over realizations of the mean regret over the last trailing_window periods"},
        {"ts_estimate", result.ts_estimate},
        {"ts_stderr", result.ts_stderr},
        {"min_models", result.min_models ? nlohmann::json(*result.min_models) : nlohmann::json(nullptr)},
    };
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& g : result.evaluated) {
        grid.push_back({{"models", g.models},
                        {"es_estimate", g.es_estimate},
                        {"es_stderr", g.es_stderr},
                        {"gap_mean", g.gap_mean},
                        {"gap_stderr", g.gap_stderr},
                        {"qualifies", g.qualifies}});
    }
    doc["evaluated"] = grid;

    if (!config.run.output.empty()) {
        const std::filesystem::path dir = config.run.output;
        std::filesystem::create_directories(dir);
        std::ofstream file(dir / "min_models.json");
        if (!file) throw std::runtime_error("cannot write '" + (dir / "min_models.json").string() + "'");
        file << doc.dump(2) << '\n';
    }
    out << "min_models: " << (result.min_models ? std::to_string(*result.min_models) : std::string("not found"))
        << '\n';
    out << doc.dump(2) << '\n';
    return kExitOk;
}

int cmd_bound(std::uint64_t actions, std::uint64_t horizon, double eps, std::ostream& out, std::ostream& err) {
    if (!theorem1_assumption_holds(actions, horizon, eps)) {
        err << "warning: |A| T / (eps * eps/2) < 9, the bound's assumption does not hold\n";
    }
    out << theorem1_min_models(actions, horizon, eps) << '\n';
    return kExitOk;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, std::ostream& out) {
    std::vector<std::string_view> names;
    if (suite == "all") {
        names = suite_names();
    } else {
        names.push_back(suite);
    }
    bool all_passed = true;
    for (auto name : names) {
        const SuiteResult r = run_suite(name, seed);
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        all_passed = all_passed && r.passed;
    }
    return all_passed ? kExitOk : kExitFailure;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ensemble sampling and Thompson sampling bandit experiments", "ensamp"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    Overrides run_overrides;
    std::string run_config;
    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", run_config, "Config file")->required();
    add_overrides(*run, run_overrides);

    Overrides mm_overrides;
    std::string mm_config;
    MinModelsArgs mm_args;
    auto* mm = app.add_subcommand("min-models", "Smallest ensemble size within eps of Thompson sampling");
    mm->add_option("config", mm_config, "Config file")->required();
    mm->add_option("--eps", mm_args.eps, "Regret slack over Thompson sampling")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    mm->add_option("--grid", mm_args.grid, "Ascending ensemble sizes")->delimiter(',');
    mm->add_option("--trailing-window", mm_args.trailing_window,
                   "Periods averaged at the end of the horizon (default: run.trailing_window)")
        ->check(CLI::PositiveNumber);
    mm->add_flag("--exhaustive", mm_args.exhaustive, "Evaluate the whole grid");
    add_overrides(*mm, mm_overrides);

    std::uint64_t actions = 0;
    std::uint64_t horizon = 0;
    double eps = 0.0;
    auto* bound = app.add_subcommand("bound", "Ensemble size sufficient for the regret guarantee");
    bound->add_option("--actions", actions, "Number of actions")->required()->check(CLI::PositiveNumber);
    bound->add_option("--horizon", horizon, "Horizon T")->required()->check(CLI::PositiveNumber);
    bound->add_option("--eps", eps, "Regret tolerance")->required()->check(CLI::PositiveNumber);

    std::string suite = "all";
    std::uint64_t verify_seed = 0;
    auto* verify = app.add_subcommand("verify", "Run property suites and print pass/fail");
    std::vector<std::string> choices{"all"};
    for (auto n : suite_names()) choices.emplace_back(n);
    verify->add_option("--suite", suite, "Suite name or 'all'")->check(CLI::IsMember(choices));
    verify->add_option("--seed", verify_seed, "Seed");

    std::vector<const char*> argv{"ensamp"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) return cmd_run(run_config, run_overrides, out);
        if (*mm) return cmd_min_models(mm_config, mm_overrides, mm_args, out);
        if (*bound) return cmd_bound(actions, horizon, eps, out, err);
        if (*verify) return cmd_verify(suite, verify_seed, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    err << app.help();
    return kExitUsage;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace ensamp
