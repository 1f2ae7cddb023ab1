#include "ensamp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "ensamp/linear_agents.hpp"
#include "ensamp/neural_agents.hpp"

namespace ensamp {

namespace {

SeededRng realization_stream(std::uint64_t seed, std::uint64_t realization, StreamRole role) {
    return SeededRng::stream(seed, {realization, role_id(role)});
}

std::uint64_t realization_key(std::uint64_t seed, std::uint64_t realization, StreamRole role) {
    return stream_key(seed, {realization, role_id(role)});
}

// Fresh-mode perturbation streams, one per model.
std::vector<SeededRng> perturbation_streams(std::uint64_t seed, std::uint64_t realization, std::size_t models) {
    std::vector<SeededRng> out;
    out.reserve(models);
    const std::uint64_t key = realization_key(seed, realization, StreamRole::perturbation);
    for (std::size_t m = 0; m < models; ++m) out.push_back(SeededRng::stream(key, {m}));
    return out;
}

std::vector<double> draw_perturbations(const NoiseTable& noise, std::vector<SeededRng>& rngs, std::size_t pull_index,
                                       std::size_t action, double noise_var) {
    const double sd = std::sqrt(noise_var);
    std::vector<double> w(rngs.size());
    for (std::size_t m = 0; m < rngs.size(); ++m) w[m] = sd * noise.perturbation(pull_index, action, m, rngs[m]);
    return w;
}

class ThompsonAgent final : public Agent {
public:
    ThompsonAgent(const EnvSpec& env_spec, const BanditEnv& env, std::uint64_t seed, std::uint64_t realization)
        : actions_(env.actions()),
          belief_(Vector::Zero(static_cast<Eigen::Index>(env_spec.feature_dim())),
                  SpdMatrix::scaled_identity(env_spec.feature_dim(), env_spec.prior_var), env_spec.noise_var),
          select_rng_(realization_stream(seed, realization, StreamRole::selection)) {}

    std::size_t select(std::size_t) override { return ts_select(belief_, actions_, select_rng_); }
    void observe(std::size_t action, double reward, std::size_t) override {
        belief_.update(actions_.action(action), reward);
    }

private:
    const ActionSet& actions_;
    GaussianBelief belief_;
    SeededRng select_rng_;
};

class LinearEnsembleAgent final : public Agent {
public:
    LinearEnsembleAgent(const AgentSpec& spec, const EnvSpec& env_spec, const BanditEnv& env, const NoiseTable& noise,
                        std::uint64_t seed, std::uint64_t realization)
        : actions_(env.actions()),
          noise_(noise),
          ensemble_(make_ensemble(spec, env_spec, seed, realization)),
          perturb_rngs_(perturbation_streams(seed, realization, spec.models)),
          select_rng_(realization_stream(seed, realization, StreamRole::selection)) {}

    std::size_t select(std::size_t) override { return es_select(ensemble_, actions_, select_rng_); }
    void observe(std::size_t action, double reward, std::size_t pull_index) override {
        const auto w = draw_perturbations(noise_, perturb_rngs_, pull_index, action, ensemble_.noise_var());
        ensemble_.update(actions_.action(action), reward, w);
    }

private:
    static LinearEnsemble make_ensemble(const AgentSpec& spec, const EnvSpec& env_spec, std::uint64_t seed,
                                        std::uint64_t realization) {
        SeededRng prior_rng = realization_stream(seed, realization, StreamRole::prior_draw);
        const std::size_t n = env_spec.feature_dim();
        return LinearEnsemble::init(Vector::Zero(static_cast<Eigen::Index>(n)),
                                    SpdMatrix::scaled_identity(n, env_spec.prior_var), env_spec.noise_var, spec.models,
                                    prior_rng);
    }

    const ActionSet& actions_;
    const NoiseTable& noise_;
    LinearEnsemble ensemble_;
    std::vector<SeededRng> perturb_rngs_;
    SeededRng select_rng_;
};

class NeuralEnsembleAgent final : public Agent {
public:
    NeuralEnsembleAgent(const AgentSpec& spec, const EnvSpec& env_spec, const BanditEnv& env, const NoiseTable& noise,
                        std::uint64_t seed, std::uint64_t realization)
        : actions_(env.actions()),
          noise_(noise),
          ensemble_(make_ensemble(spec, env_spec, seed, realization)),
          perturb_rngs_(perturbation_streams(seed, realization, spec.models)),
          select_rng_(realization_stream(seed, realization, StreamRole::selection)) {}

    std::size_t select(std::size_t) override { return ensemble_.select(actions_, select_rng_); }
    void observe(std::size_t action, double reward, std::size_t pull_index) override {
        const auto w = draw_perturbations(noise_, perturb_rngs_, pull_index, action, ensemble_.noise_var());
        ensemble_.update(actions_.action(action), reward, w);
    }

private:
    static NeuralEnsemble make_ensemble(const AgentSpec& spec, const EnvSpec& env_spec, std::uint64_t seed,
                                        std::uint64_t realization) {
        SeededRng prior_rng = realization_stream(seed, realization, StreamRole::prior_draw);
        return NeuralEnsemble(agent_net_shape(spec, env_spec), spec.models, env_spec.prior_var, env_spec.noise_var,
                              spec.sgd, prior_rng, realization_key(seed, realization, StreamRole::minibatch));
    }

    const ActionSet& actions_;
    const NoiseTable& noise_;
    NeuralEnsemble ensemble_;
    std::vector<SeededRng> perturb_rngs_;
    SeededRng select_rng_;
};

class EpsilonGreedyDriver final : public Agent {
public:
    EpsilonGreedyDriver(const AgentSpec& spec, const EnvSpec& env_spec, const BanditEnv& env, std::uint64_t seed,
                        std::uint64_t realization)
        : actions_(env.actions()),
          agent_(make(spec, env_spec, seed, realization)),
          explore_rng_(realization_stream(seed, realization, StreamRole::exploration)) {}

    std::size_t select(std::size_t t) override { return agent_.select(actions_, t, explore_rng_); }
    void observe(std::size_t action, double reward, std::size_t) override {
        agent_.update(actions_.action(action), reward);
    }

private:
    static EpsilonGreedyAgent make(const AgentSpec& spec, const EnvSpec& env_spec, std::uint64_t seed,
                                   std::uint64_t realization) {
        SeededRng prior_rng = realization_stream(seed, realization, StreamRole::prior_draw);
        return EpsilonGreedyAgent(agent_net_shape(spec, env_spec), env_spec.prior_var, env_spec.noise_var, spec.sgd,
                                  spec.schedule, prior_rng, realization_key(seed, realization, StreamRole::minibatch));
    }

    const ActionSet& actions_;
    EpsilonGreedyAgent agent_;
    SeededRng explore_rng_;
};

class DropoutDriver final : public Agent {
public:
    DropoutDriver(const AgentSpec& spec, const EnvSpec& env_spec, const BanditEnv& env, std::uint64_t seed,
                  std::uint64_t realization)
        : actions_(env.actions()),
          agent_(make(spec, env_spec, seed, realization)),
          select_rng_(realization_stream(seed, realization, StreamRole::selection)) {}

    std::size_t select(std::size_t) override { return agent_.select(actions_, select_rng_); }
    void observe(std::size_t action, double reward, std::size_t) override {
        agent_.update(actions_.action(action), reward);
    }

private:
    static DropoutAgent make(const AgentSpec& spec, const EnvSpec& env_spec, std::uint64_t seed,
                             std::uint64_t realization) {
        SeededRng prior_rng = realization_stream(seed, realization, StreamRole::prior_draw);
        return DropoutAgent(agent_net_shape(spec, env_spec), env_spec.prior_var, env_spec.noise_var, spec.sgd,
                            spec.drop_prob, prior_rng, realization_key(seed, realization, StreamRole::minibatch),
                            realization_key(seed, realization, StreamRole::dropout));
    }

    const ActionSet& actions_;
    DropoutAgent agent_;
    SeededRng select_rng_;
};

}  // namespace

std::unique_ptr<Agent> make_agent(const AgentSpec& spec, const EnvSpec& env_spec, const BanditEnv& env,
                                  const NoiseTable& noise, std::uint64_t seed, std::uint64_t realization) {
    switch (spec.kind) {
        case AgentKind::thompson: return std::make_unique<ThompsonAgent>(env_spec, env, seed, realization);
        case AgentKind::ensemble:
            return std::make_unique<LinearEnsembleAgent>(spec, env_spec, env, noise, seed, realization);
        case AgentKind::neural_ensemble:
            return std::make_unique<NeuralEnsembleAgent>(spec, env_spec, env, noise, seed, realization);
        case AgentKind::epsilon_greedy:
            return std::make_unique<EpsilonGreedyDriver>(spec, env_spec, env, seed, realization);
        case AgentKind::dropout: return std::make_unique<DropoutDriver>(spec, env_spec, env, seed, realization);
    }
    throw std::invalid_argument("make_agent: unknown agent kind");
}

std::unique_ptr<BanditEnv> realization_env(const ExperimentConfig& config, std::uint64_t realization) {
    SeededRng rng = realization_stream(config.run.seed, realization, StreamRole::environment);
    return sample_env_from_prior(config.env, rng);
}

NoiseTable realization_noise(const ExperimentConfig& config, std::uint64_t realization) {
    return NoiseTable(config.run.noise_mode, realization_key(config.run.seed, realization, StreamRole::coupled_reward));
}

RegretTrace run_realization(const ExperimentConfig& config, const AgentSpec& agent_spec, std::uint64_t realization) {
    const auto env = realization_env(config, realization);
    const NoiseTable noise = realization_noise(config, realization);
    const auto agent = make_agent(agent_spec, config.env, *env, noise, config.run.seed, realization);
    SeededRng reward_rng = realization_stream(config.run.seed, realization, StreamRole::reward_noise);

    RegretTrace trace;
    trace.realization = realization;
    trace.regret.resize(config.run.horizon);
    ActionCounts counts(env->num_actions(), 0);
    const double best = env->optimal().reward;
    for (std::size_t t = 0; t < config.run.horizon; ++t) {
        try {
            const std::size_t action = agent->select(t);
            const std::size_t pull_index = counts.at(action);
            const double reward = step(*env, action, counts, noise, reward_rng);
            agent->observe(action, reward, pull_index);
            trace.regret[t] = best - env->true_mean(action);
        } catch (const std::exception& e) {
            throw std::runtime_error("agent '" + agent_spec.name + "', realization " + std::to_string(realization) +
                                     ", period " + std::to_string(t) + ": " + e.what());
        }
    }
    return trace;
}

ExperimentResult run_traces(const ExperimentConfig& config, std::size_t threads) {
    const std::size_t num_agents = config.agents.size();
    const std::size_t reps = config.run.realizations;
    const std::size_t tasks = num_agents * reps;

    ExperimentResult result;
    result.agents.resize(num_agents);
    for (std::size_t a = 0; a < num_agents; ++a) {
        result.agents[a].name = config.agents[a].name;
        result.agents[a].traces.resize(reps);
    }
    std::vector<std::exception_ptr> errors(tasks);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t task = next.fetch_add(1); task < tasks; task = next.fetch_add(1)) {
            const std::size_t a = task / reps;
            const std::size_t r = task % reps;
            try {
                result.agents[a].traces[r] = run_realization(config, config.agents[a], r);
            } catch (...) {
                errors[task] = std::current_exception();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(tasks, 1));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (auto& agent : result.agents) {
        std::vector<std::vector<double>> traces;
        traces.reserve(agent.traces.size());
        for (const auto& tr : agent.traces) traces.push_back(tr.regret);
        agent.summary = aggregate_regret(traces);
    }
    return result;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_traces_csv(std::ostream& out, const ExperimentResult& result) {
    out << "agent,realization,t,regret\n";
    for (const auto& agent : result.agents) {
        for (const auto& trace : agent.traces) {
            for (std::size_t t = 0; t < trace.regret.size(); ++t) {
                out << agent.name << ',' << trace.realization << ',' << t << ',' << format_double(trace.regret[t])
                    << '\n';
            }
        }
    }
}

void write_summary_csv(std::ostream& out, const ExperimentResult& result) {
    out << "agent,t,mean_regret,stderr\n";
    for (const auto& agent : result.agents) {
        for (std::size_t t = 0; t < agent.summary.per_period_mean.size(); ++t) {
            out << agent.name << ',' << t << ',' << format_double(agent.summary.per_period_mean[t]) << ','
                << format_double(agent.summary.per_period_stderr[t]) << '\n';
        }
    }
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write output file '" + path.string() + "'");
    return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& output_dir) {
    if (!output_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(output_dir, ec);
        if (ec) throw std::runtime_error("cannot create output directory '" + output_dir.string() + "': " + ec.message());
        // Probe every file before simulating.
        for (const char* name : {"traces.csv", "summary.csv", "metadata.json"}) open_output(output_dir / name);
    }
    ExperimentResult result = run_traces(config, config.run.threads);
    if (!output_dir.empty()) {
        {
            auto out = open_output(output_dir / "traces.csv");
            write_traces_csv(out, result);
        }
        {
            auto out = open_output(output_dir / "summary.csv");
            write_summary_csv(out, result);
        }
        nlohmann::json meta = {
            {"config", to_json(config)},
            {"regret", "instantaneous mean-reward regret R* - mean_reward(A_t) given the realization's parameters"},
            {"stderr", "sample standard deviation over realizations divided by sqrt(realizations); 0 when realizations == 1"},
        };
        nlohmann::json agents = nlohmann::json::array();
        for (const auto& a : result.agents) {
            agents.push_back({{"name", a.name},
                              {"cumulative_mean", a.summary.cumulative_mean},
                              {"cumulative_stderr", a.summary.cumulative_stderr}});
        }
        meta["agents"] = agents;
        auto out = open_output(output_dir / "metadata.json");
        out << meta.dump(2) << '\n';
    }
    return result;
}

std::vector<double> trailing_means(std::span<const RegretTrace> traces, std::size_t window) {
    std::vector<double> out;
    out.reserve(traces.size());
    for (const auto& tr : traces) {
        if (window < 1 || window > tr.regret.size()) throw std::invalid_argument("trailing_means: invalid window");
        double s = 0.0;
        for (std::size_t t = tr.regret.size() - window; t < tr.regret.size(); ++t) s += tr.regret[t];
        out.push_back(s / static_cast<double>(window));
    }
    return out;
}

MinModelsResult min_models_search(const ExperimentConfig& config, const MinModelsOptions& options) {
    if (options.grid.empty()) throw std::invalid_argument("min_models_search: empty grid");
    if (!std::is_sorted(options.grid.begin(), options.grid.end()) || options.grid.front() < 1) {
        throw std::invalid_argument("min_models_search: grid must be ascending with entries >= 1");
    }
    if (!(options.eps_target > 0.0)) throw std::invalid_argument("min_models_search: eps_target must be positive");
    if (config.env.family != EnvFamily::independent_gaussian && config.env.family != EnvFamily::linear) {
        throw std::invalid_argument("min_models_search: needs a linear or independent_gaussian environment");
    }
    if (options.trailing_window < 1 || options.trailing_window > config.run.horizon) {
        throw std::invalid_argument("min_models_search: trailing_window must lie in [1, horizon]");
    }

    AgentSpec es_template;
    es_template.kind = AgentKind::ensemble;
    for (const auto& a : config.agents) {
        if (a.kind == AgentKind::ensemble) {
            es_template = a;
            break;
        }
    }

    auto run_single = [&](AgentSpec agent) {
        ExperimentConfig single = config;
        agent.name = default_agent_name(agent);
        single.agents = {agent};
        ExperimentResult r = run_traces(single, options.threads);
        return trailing_means(r.agents.front().traces, options.trailing_window);
    };

    MinModelsResult out;
    out.trailing_window = options.trailing_window;
    AgentSpec ts;
    ts.kind = AgentKind::thompson;
    const std::vector<double> ts_values = run_single(ts);
    const MeanStderr ts_stats = mean_stderr(ts_values);
    out.ts_estimate = ts_stats.mean;
    out.ts_stderr = ts_stats.stderr;

    for (std::size_t models : options.grid) {
        AgentSpec es = es_template;
        es.models = models;
        const std::vector<double> es_values = run_single(es);
        std::vector<double> gaps(es_values.size());
        for (std::size_t i = 0; i < gaps.size(); ++i) gaps[i] = es_values[i] - ts_values[i];
        const MeanStderr es_stats = mean_stderr(es_values);
        const MeanStderr gap = mean_stderr(gaps);
        const bool ok = es_stats.mean <= out.ts_estimate + options.eps_target;
        out.evaluated.push_back({models, es_stats.mean, es_stats.stderr, gap.mean, gap.stderr, ok});
        if (ok && !out.min_models) {
            out.min_models = models;
            if (!options.exhaustive) break;
        }
    }
    return out;
}

}  // namespace ensamp
