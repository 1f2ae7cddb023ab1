#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ensamp/config.hpp"
#include "ensamp/environments.hpp"
#include "ensamp/stats.hpp"

namespace ensamp {

// Agent as driven by the episode loop.
class Agent {
public:
    virtual ~Agent() = default;
    virtual std::size_t select(std::size_t t) = 0;
    // pull_index: how many times `action` was taken before this observation.
    virtual void observe(std::size_t action, double reward, std::size_t pull_index) = 0;
};

// Builds the agent for one realization. All of its randomness comes from
// streams keyed by (seed, realization, role[, model]).
std::unique_ptr<Agent> make_agent(const AgentSpec& spec, const EnvSpec& env_spec, const BanditEnv& env,
                                  const NoiseTable& noise, std::uint64_t seed, std::uint64_t realization);

// Ground truth of one realization, drawn from (seed, realization, environment).
std::unique_ptr<BanditEnv> realization_env(const ExperimentConfig& config, std::uint64_t realization);
NoiseTable realization_noise(const ExperimentConfig& config, std::uint64_t realization);

struct RegretTrace {
    std::uint64_t realization = 0;
    std::vector<double> regret;  // R* - mean reward of the chosen action, per period
};

RegretTrace run_realization(const ExperimentConfig& config, const AgentSpec& agent, std::uint64_t realization);

struct AgentResult {
    std::string name;
    std::vector<RegretTrace> traces;  // ordered by realization id
    RegretSummary summary;
};

struct ExperimentResult {
    std::vector<AgentResult> agents;  // config order
};

// Runs every (agent, realization) pair on `threads` workers (0: hardware
// concurrency). Output does not depend on the thread count.
ExperimentResult run_traces(const ExperimentConfig& config, std::size_t threads);

// run_traces plus CSV output into output_dir (skipped when empty). The
// directory is created and probed before any simulation starts.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& output_dir = {});

// CSV writers; doubles are printed with 17 significant digits.
void write_traces_csv(std::ostream& out, const ExperimentResult& result);
void write_summary_csv(std::ostream& out, const ExperimentResult& result);
std::string format_double(double v);

// Mean of the last `window` periods of each trace.
std::vector<double> trailing_means(std::span<const RegretTrace> traces, std::size_t window);

struct GridPoint {
    std::size_t models;
    double es_estimate;
    double es_stderr;
    double gap_mean;    // paired mean of (ES - TS) per realization
    double gap_stderr;
    bool qualifies;
};

struct MinModelsResult {
    std::optional<std::size_t> min_models;  // nullopt: no grid entry qualified
    double ts_estimate = 0.0;
    double ts_stderr = 0.0;
    std::size_t trailing_window = 1;
    std::vector<GridPoint> evaluated;
};

struct MinModelsOptions {
    double eps_target = 0.03;
    std::vector<std::size_t> grid;
    std::size_t trailing_window = 1;  // 1: regret at period T-1 only
    bool exhaustive = false;          // evaluate the whole grid instead of stopping at the first hit
    std::size_t threads = 0;
};

// Smallest M in the grid whose estimated per-period regret at the end of the
// horizon is at most the Thompson sampling estimate plus eps_target. The
// ensemble agent template is the first `es` agent of the config (default
// settings otherwise); the environment must be linear or independent_gaussian.
MinModelsResult min_models_search(const ExperimentConfig& config, const MinModelsOptions& options);

}  // namespace ensamp
