#include "ensamp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace ensamp {

AgentKind parse_agent_kind(std::string_view name) {
    if (name == "ts") return AgentKind::thompson;
    if (name == "es") return AgentKind::ensemble;
    if (name == "neural_es") return AgentKind::neural_ensemble;
    if (name == "epsilon_greedy") return AgentKind::epsilon_greedy;
    if (name == "dropout") return AgentKind::dropout;
    throw ConfigError("unknown agent kind '" + std::string(name) + "'");
}

std::string_view to_string(AgentKind kind) {
    switch (kind) {
        case AgentKind::thompson: return "ts";
        case AgentKind::ensemble: return "es";
        case AgentKind::neural_ensemble: return "neural_es";
        case AgentKind::epsilon_greedy: return "epsilon_greedy";
        case AgentKind::dropout: return "dropout";
    }
    return "?";
}

Activation parse_activation(std::string_view name) {
    if (name == "relu") return Activation::relu;
    if (name == "leaky_relu") return Activation::leaky_relu;
    if (name == "identity") return Activation::identity;
    throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation act) {
    switch (act) {
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::identity: return "identity";
    }
    return "?";
}

namespace {

std::string format_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

bool is_linear_family(EnvFamily f) { return f == EnvFamily::independent_gaussian || f == EnvFamily::linear; }

using json = nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

std::size_t get_count(const json& obj, const std::string& key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ConfigError(where + "." + key + ": expected a nonnegative integer");
    }
    return v.get<std::size_t>();
}

const std::set<std::string> kSgdKeys = {"learning_rate", "sgd_steps", "minibatch", "minibatch_mode",
                                        "loss_scaling", "hidden", "activation"};

std::set<std::string> allowed_agent_keys(AgentKind kind) {
    std::set<std::string> keys = {"kind", "name"};
    switch (kind) {
        case AgentKind::thompson: break;
        case AgentKind::ensemble: keys.insert("models"); break;
        case AgentKind::neural_ensemble:
            keys.insert("models");
            keys.insert(kSgdKeys.begin(), kSgdKeys.end());
            break;
        case AgentKind::epsilon_greedy:
            keys.insert({"schedule", "epsilon", "anneal_k"});
            keys.insert(kSgdKeys.begin(), kSgdKeys.end());
            break;
        case AgentKind::dropout:
            keys.insert("drop_prob");
            keys.insert(kSgdKeys.begin(), kSgdKeys.end());
            break;
    }
    return keys;
}

AgentSpec parse_agent(const json& obj, const std::string& where) {
    if (!obj.is_object() || !obj.contains("kind")) throw ConfigError(where + ": agent needs a 'kind'");
    AgentSpec spec;
    spec.kind = parse_agent_kind(get<std::string>(obj, "kind", where));
    reject_unknown_keys(obj, allowed_agent_keys(spec.kind), where);
    if (obj.contains("name")) spec.name = get<std::string>(obj, "name", where);
    if (obj.contains("models")) spec.models = get_count(obj, "models", where);
    if (obj.contains("learning_rate")) spec.sgd.learning_rate = get<double>(obj, "learning_rate", where);
    if (obj.contains("sgd_steps")) spec.sgd.steps = get_count(obj, "sgd_steps", where);
    if (obj.contains("minibatch")) spec.sgd.minibatch = get_count(obj, "minibatch", where);
    if (obj.contains("minibatch_mode")) {
        try {
            spec.sgd.mode = parse_minibatch_mode(get<std::string>(obj, "minibatch_mode", where));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    if (obj.contains("loss_scaling")) {
        try {
            spec.sgd.scaling = parse_loss_scaling(get<std::string>(obj, "loss_scaling", where));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    if (obj.contains("hidden")) spec.hidden = get_count(obj, "hidden", where);
    if (obj.contains("activation")) spec.activation = parse_activation(get<std::string>(obj, "activation", where));

    if (spec.kind == AgentKind::epsilon_greedy) {
        const std::string schedule = obj.contains("schedule") ? get<std::string>(obj, "schedule", where) : "fixed";
        if (schedule == "fixed") {
            if (obj.contains("anneal_k")) throw ConfigError(where + ": anneal_k needs schedule 'annealing'");
            spec.schedule = EpsilonSchedule::fixed(obj.contains("epsilon") ? get<double>(obj, "epsilon", where) : 0.1);
        } else if (schedule == "annealing") {
            if (obj.contains("epsilon")) throw ConfigError(where + ": epsilon needs schedule 'fixed'");
            if (!obj.contains("anneal_k")) throw ConfigError(where + ": annealing schedule needs 'anneal_k'");
            spec.schedule = EpsilonSchedule::annealing(get<double>(obj, "anneal_k", where));
        } else {
            throw ConfigError(where + ": unknown schedule '" + schedule + "'");
        }
    }
    if (spec.kind == AgentKind::dropout) {
        spec.drop_prob = obj.contains("drop_prob") ? get<double>(obj, "drop_prob", where) : 0.5;
        if (!obj.contains("learning_rate")) {
            const auto lr = default_dropout_learning_rate(spec.drop_prob);
            if (!lr) throw ConfigError(where + ": no default learning_rate for this drop_prob; set one");
            spec.sgd.learning_rate = *lr;
        }
    }
    return spec;
}

}  // namespace

std::string default_agent_name(const AgentSpec& spec) {
    switch (spec.kind) {
        case AgentKind::thompson: return "ts";
        case AgentKind::ensemble: return "es_M" + std::to_string(spec.models);
        case AgentKind::neural_ensemble: return "neural_es_M" + std::to_string(spec.models);
        case AgentKind::epsilon_greedy:
            return spec.schedule.kind == EpsilonSchedule::Kind::fixed ? "eps_" + format_number(spec.schedule.value)
                                                                      : "eps_anneal_" + format_number(spec.schedule.value);
        case AgentKind::dropout: return "dropout_p" + format_number(spec.drop_prob);
    }
    return "agent";
}

NetShape agent_net_shape(const AgentSpec& agent, const EnvSpec& env) {
    NetShape shape;
    shape.input_dim = env.feature_dim();
    const bool two_layer = env.family == EnvFamily::two_layer || agent.kind == AgentKind::dropout;
    shape.arch = two_layer ? Architecture::two_layer : Architecture::neuron;
    shape.hidden = two_layer ? agent.hidden.value_or(env.hidden) : 0;
    const Activation fallback =
        (is_linear_family(env.family) && !two_layer) ? Activation::identity : Activation::leaky_relu;
    shape.activation = agent.activation.value_or(fallback);
    return shape;
}

void validate(ExperimentConfig& config) {
    try {
        validate(config.env);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (config.agents.empty()) throw ConfigError("config: at least one agent is required");
    if (config.run.horizon < 1) throw ConfigError("run.horizon must be >= 1");
    if (config.run.realizations < 1) throw ConfigError("run.realizations must be >= 1");
    if (config.run.trailing_window < 1 || config.run.trailing_window > config.run.horizon) {
        throw ConfigError("run.trailing_window must lie in [1, horizon]");
    }
    std::set<std::string> names;
    for (auto& agent : config.agents) {
        if (agent.name.empty()) agent.name = default_agent_name(agent);
        if (!names.insert(agent.name).second) throw ConfigError("duplicate agent name '" + agent.name + "'");
        const std::string where = "agent '" + agent.name + "'";
        const bool linear_env = is_linear_family(config.env.family);
        if ((agent.kind == AgentKind::thompson || agent.kind == AgentKind::ensemble) && !linear_env) {
            throw ConfigError(where + ": exact ts/es agents need a linear or independent_gaussian environment");
        }
        if ((agent.kind == AgentKind::ensemble || agent.kind == AgentKind::neural_ensemble) && agent.models < 1) {
            throw ConfigError(where + ": models must be >= 1");
        }
        if (agent.kind == AgentKind::neural_ensemble || agent.kind == AgentKind::epsilon_greedy ||
            agent.kind == AgentKind::dropout) {
            try {
                validate(agent.sgd);
                if (agent.kind == AgentKind::epsilon_greedy) validate(agent.schedule);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(where + ": " + e.what());
            }
            const NetShape shape = agent_net_shape(agent, config.env);
            if (shape.arch == Architecture::two_layer && shape.hidden < 1) {
                throw ConfigError(where + ": two-layer network needs 'hidden' >= 1");
            }
        }
        if (agent.kind == AgentKind::dropout && !(agent.drop_prob >= 0.0 && agent.drop_prob < 1.0)) {
            throw ConfigError(where + ": drop_prob must lie in [0, 1)");
        }
    }
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
    reject_unknown_keys(doc, {"env", "agents", "run"}, "config");
    if (!doc.contains("env") || !doc.contains("agents") || !doc.contains("run")) {
        throw ConfigError("config: 'env', 'agents' and 'run' are all required");
    }
    ExperimentConfig config;

    const json& env = doc.at("env");
    reject_unknown_keys(env, {"family", "num_actions", "dim", "hidden", "prior_var", "noise_var"}, "env");
    if (!env.contains("family")) throw ConfigError("env.family is required");
    try {
        config.env.family = parse_env_family(get<std::string>(env, "family", "env"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("env.family: ") + e.what());
    }
    if (env.contains("num_actions")) config.env.num_actions = get_count(env, "num_actions", "env");
    if (env.contains("dim")) config.env.dim = get_count(env, "dim", "env");
    if (env.contains("hidden")) config.env.hidden = get_count(env, "hidden", "env");
    if (env.contains("prior_var")) config.env.prior_var = get<double>(env, "prior_var", "env");
    if (env.contains("noise_var")) config.env.noise_var = get<double>(env, "noise_var", "env");
    if (config.env.family == EnvFamily::independent_gaussian && env.contains("dim")) {
        throw ConfigError("env.dim is not used by independent_gaussian (dimension equals num_actions)");
    }
    if (config.env.family != EnvFamily::two_layer && env.contains("hidden")) {
        throw ConfigError("env.hidden is only used by two_layer");
    }

    const json& agents = doc.at("agents");
    if (!agents.is_array()) throw ConfigError("agents: expected an array");
    for (std::size_t i = 0; i < agents.size(); ++i) {
        config.agents.push_back(parse_agent(agents[i], "agents[" + std::to_string(i) + "]"));
    }

    const json& run = doc.at("run");
    reject_unknown_keys(run,
                        {"horizon", "realizations", "seed", "noise_mode", "output", "threads", "trailing_window"},
                        "run");
    if (run.contains("horizon")) config.run.horizon = get_count(run, "horizon", "run");
    if (run.contains("realizations")) config.run.realizations = get_count(run, "realizations", "run");
    if (run.contains("seed")) config.run.seed = get<std::uint64_t>(run, "seed", "run");
    if (run.contains("noise_mode")) {
        try {
            config.run.noise_mode = parse_noise_mode(get<std::string>(run, "noise_mode", "run"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("run.noise_mode: ") + e.what());
        }
    }
    if (run.contains("output")) config.run.output = get<std::string>(run, "output", "run");
    if (run.contains("threads")) config.run.threads = get_count(run, "threads", "run");
    if (run.contains("trailing_window")) config.run.trailing_window = get_count(run, "trailing_window", "run");

    validate(config);
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "': " + e.what());
    }
    return parse_config(doc);
}

nlohmann::json to_json(const ExperimentConfig& config) {
    json env = {{"family", std::string(to_string(config.env.family))},
                {"num_actions", config.env.num_actions},
                {"prior_var", config.env.prior_var},
                {"noise_var", config.env.noise_var}};
    if (config.env.family != EnvFamily::independent_gaussian) env["dim"] = config.env.dim;
    if (config.env.family == EnvFamily::two_layer) env["hidden"] = config.env.hidden;

    json agents = json::array();
    for (const auto& a : config.agents) {
        json j = {{"kind", std::string(to_string(a.kind))}, {"name", a.name}};
        if (a.kind == AgentKind::ensemble || a.kind == AgentKind::neural_ensemble) j["models"] = a.models;
        if (a.kind == AgentKind::neural_ensemble || a.kind == AgentKind::epsilon_greedy ||
            a.kind == AgentKind::dropout) {
            j["learning_rate"] = a.sgd.learning_rate;
            j["sgd_steps"] = a.sgd.steps;
            j["minibatch"] = a.sgd.minibatch;
            j["minibatch_mode"] = std::string(to_string(a.sgd.mode));
            j["loss_scaling"] = std::string(to_string(a.sgd.scaling));
            if (a.hidden) j["hidden"] = *a.hidden;
            if (a.activation) j["activation"] = std::string(to_string(*a.activation));
        }
        if (a.kind == AgentKind::epsilon_greedy) {
            if (a.schedule.kind == EpsilonSchedule::Kind::fixed) {
                j["schedule"] = "fixed";
                j["epsilon"] = a.schedule.value;
            } else {
                j["schedule"] = "annealing";
                j["anneal_k"] = a.schedule.value;
            }
        }
        if (a.kind == AgentKind::dropout) j["drop_prob"] = a.drop_prob;
        agents.push_back(std::move(j));
    }

    json run = {{"horizon", config.run.horizon},
                {"realizations", config.run.realizations},
                {"seed", config.run.seed},
                {"noise_mode", std::string(to_string(config.run.noise_mode))},
                {"trailing_window", config.run.trailing_window}};
    if (!config.run.output.empty()) run["output"] = config.run.output;
    return {{"env", env}, {"agents", agents}, {"run", run}};
}

}  // namespace ensamp
