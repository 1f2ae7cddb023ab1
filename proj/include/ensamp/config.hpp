#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ensamp/environments.hpp"
#include "ensamp/mlp.hpp"
#include "ensamp/neural_agents.hpp"

namespace ensamp {

// Invalid or unreadable experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class AgentKind { thompson, ensemble, neural_ensemble, epsilon_greedy, dropout };

AgentKind parse_agent_kind(std::string_view name);
std::string_view to_string(AgentKind kind);

struct AgentSpec {
    AgentKind kind = AgentKind::thompson;
    std::string name;  // CSV label; filled with a default when empty
    std::size_t models = 10;
    EpsilonSchedule schedule;
    double drop_prob = 0.5;
    SgdConfig sgd;
    std::optional<std::size_t> hidden;
    std::optional<Activation> activation;
};

struct RunSpec {
    std::size_t horizon = 100;
    std::size_t realizations = 1;
    std::uint64_t seed = 0;
    NoiseMode noise_mode = NoiseMode::fresh;
    std::string output;  // directory; empty means "not set"
    std::size_t threads = 0;  // 0: hardware concurrency
    std::size_t trailing_window = 1;
};

struct ExperimentConfig {
    EnvSpec env;
    std::vector<AgentSpec> agents;
    RunSpec run;
};

std::string default_agent_name(const AgentSpec& spec);

// Network the neural agents fit for a given environment.
NetShape agent_net_shape(const AgentSpec& agent, const EnvSpec& env);

// Throws ConfigError on any violated constraint; fills default agent names.
void validate(ExperimentConfig& config);

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation act);

}  // namespace ensamp
