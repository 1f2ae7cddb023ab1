#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ensamp/environments.hpp"
#include "ensamp/mlp.hpp"
#include "ensamp/rng.hpp"

namespace ensamp {

// How each SGD iteration picks its minibatch: `sample` draws
// min(minibatch, replay size) stored observations uniformly with replacement,
// `full` uses the whole replay (plain gradient descent).
enum class MinibatchMode { sample, full };

MinibatchMode parse_minibatch_mode(std::string_view name);
std::string_view to_string(MinibatchMode mode);

// Objective each SGD iteration descends. `sum`: the anchored loss summed over
// the minibatch with the prior term at full weight. `normalized`: that loss
// divided through by the replay size n, estimated from the minibatch, i.e.
// (1/noise_var) mean_batch (target - g)^2 + (1/(prior_var n)) ||params - anchor||^2.
// `normalized` has the same minimizer as the full-replay loss and tolerates
// larger learning rates on wide inputs.
enum class LossScaling { sum, normalized };

LossScaling parse_loss_scaling(std::string_view name);
std::string_view to_string(LossScaling scaling);

struct SgdConfig {
    double learning_rate = 0.1;
    std::size_t steps = 3;
    std::size_t minibatch = 64;
    MinibatchMode mode = MinibatchMode::sample;
    LossScaling scaling = LossScaling::sum;
};

void validate(const SgdConfig& sgd);

struct NetShape {
    Architecture arch = Architecture::neuron;
    std::size_t input_dim = 1;
    std::size_t hidden = 0;
    Activation activation = Activation::leaky_relu;
};

// g(a) for every action; hidden_scale as in forward().
Vector forward_all(const MlpParams& params, const ActionSet& actions, Activation act,
                   const Vector* hidden_scale = nullptr);

// M networks, each anchored to its own prior draw and fit to the shared
// actions with its own perturbed targets. The perturbation of observation tau
// for model m is stored once and reused by every later SGD pass.
class NeuralEnsemble {
public:
    // Anchors are drawn from prior_rng in model order; model m samples its
    // minibatches from the stream (minibatch_key, m).
    NeuralEnsemble(NetShape shape, std::size_t num_models, double prior_var, double noise_var, SgdConfig sgd,
                   SeededRng& prior_rng, std::uint64_t minibatch_key);

    std::size_t size() const noexcept { return models_.size(); }
    const NetShape& shape() const noexcept { return shape_; }
    const SgdConfig& sgd() const noexcept { return sgd_; }
    double prior_var() const noexcept { return prior_var_; }
    double noise_var() const noexcept { return noise_var_; }
    const std::vector<MlpParams>& models() const noexcept { return models_; }
    const std::vector<MlpParams>& anchors() const noexcept { return anchors_; }

    std::size_t replay_size() const noexcept { return actions_.size(); }
    const Vector& replay_action(std::size_t obs) const { return actions_.at(obs); }
    // reward + perturbation stored for (obs, model).
    double replay_target(std::size_t obs, std::size_t model) const;

    // Appends (a, reward + perturbations[m]) for each model m, then runs the
    // configured SGD iterations on every model.
    void update(const Vector& a, double reward, std::span<const double> perturbations);
    // As above with perturbations drawn from N(0, noise_var) using rng.
    void update(const Vector& a, double reward, SeededRng& rng);

    // Uniform model, then its greedy action.
    std::size_t select(const ActionSet& actions, SeededRng& rng) const;

private:
    NetShape shape_;
    double prior_var_;
    double noise_var_;
    SgdConfig sgd_;
    std::vector<MlpParams> models_;
    std::vector<MlpParams> anchors_;
    std::vector<SeededRng> minibatch_rngs_;
    std::vector<Vector> actions_;
    std::vector<double> targets_;  // obs-major: targets_[obs * M + m]
};

NeuralEnsemble neural_es_update(const NeuralEnsemble& ens, const Vector& a, double reward, SeededRng& rng);
std::size_t neural_es_select(const NeuralEnsemble& ens, const ActionSet& actions, SeededRng& rng);

// Exploration rate: fixed epsilon, or min(1, k / (t + 1)) when annealing.
struct EpsilonSchedule {
    enum class Kind { fixed, annealing };
    Kind kind = Kind::fixed;
    double value = 0.1;

    static EpsilonSchedule fixed(double epsilon) { return {Kind::fixed, epsilon}; }
    static EpsilonSchedule annealing(double k) { return {Kind::annealing, k}; }

    double at(std::size_t t) const noexcept;
};

void validate(const EpsilonSchedule& schedule);

// A single anchored network fit to unperturbed rewards.
class EpsilonGreedyAgent {
public:
    EpsilonGreedyAgent(NetShape shape, double prior_var, double noise_var, SgdConfig sgd, EpsilonSchedule schedule,
                       SeededRng& prior_rng, std::uint64_t minibatch_key);

    const MlpParams& net() const noexcept { return net_; }
    const MlpParams& anchor() const noexcept { return anchor_; }
    const EpsilonSchedule& schedule() const noexcept { return schedule_; }

    void update(const Vector& a, double reward);
    std::size_t select(const ActionSet& actions, std::size_t t, SeededRng& rng) const;

private:
    NetShape shape_;
    double prior_var_;
    double noise_var_;
    SgdConfig sgd_;
    EpsilonSchedule schedule_;
    MlpParams net_;
    MlpParams anchor_;
    SeededRng minibatch_rng_;
    std::vector<Vector> actions_;
    std::vector<double> rewards_;
};

std::size_t eps_select(const EpsilonGreedyAgent& agent, const ActionSet& actions, std::size_t t, SeededRng& rng);

// Learning rates used with dropout probabilities 0.25, 0.5, 0.75 and 0.9.
std::optional<double> default_dropout_learning_rate(double drop_prob);

// the hidden units (dropped units are zeroed, kept units are not rescaled).
// the hidden units (inverted scaling 1 / (1 - p)).
class DropoutAgent {
public:
    DropoutAgent(NetShape shape, double prior_var, double noise_var, SgdConfig sgd, double drop_prob,
                 SeededRng& prior_rng, std::uint64_t minibatch_key, std::uint64_t mask_key);

    const MlpParams& net() const noexcept { return net_; }
    double drop_prob() const noexcept { return drop_prob_; }

    Vector sample_mask(SeededRng& rng) const;
    void update(const Vector& a, double reward);
    std::size_t select(const ActionSet& actions, SeededRng& rng) const;

private:
    NetShape shape_;
    double prior_var_;
    double noise_var_;
    SgdConfig sgd_;
    double drop_prob_;
    MlpParams net_;
    MlpParams anchor_;
    SeededRng minibatch_rng_;
    SeededRng mask_rng_;
    std::vector<Vector> actions_;
    std::vector<double> rewards_;
};

std::size_t dropout_select(const DropoutAgent& agent, const ActionSet& actions, SeededRng& rng);

}  // namespace ensamp
