#include "ensamp/neural_agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ensamp {

MinibatchMode parse_minibatch_mode(std::string_view name) {
    if (name == "sample") return MinibatchMode::sample;
    if (name == "full") return MinibatchMode::full;
    throw std::invalid_argument("unknown minibatch mode '" + std::string(name) + "'");
}

std::string_view to_string(MinibatchMode mode) { return mode == MinibatchMode::sample ? "sample" : "full"; }

LossScaling parse_loss_scaling(std::string_view name) {
    if (name == "sum") return LossScaling::sum;
    if (name == "normalized") return LossScaling::normalized;
    throw std::invalid_argument("unknown loss scaling '" + std::string(name) + "' (expected sum or normalized)");
}

std::string_view to_string(LossScaling scaling) { return scaling == LossScaling::sum ? "sum" : "normalized"; }

void validate(const SgdConfig& sgd) {
    if (!(sgd.learning_rate >= 0.0) || !std::isfinite(sgd.learning_rate)) {
        throw std::invalid_argument("sgd: learning_rate must be finite and >= 0");
    }
    if (sgd.mode == MinibatchMode::sample && sgd.minibatch < 1) throw std::invalid_argument("sgd: minibatch must be >= 1");
}

namespace {

void check_shape(const NetShape& shape) {
    if (shape.input_dim < 1) throw std::invalid_argument("network: input_dim must be >= 1");
    if (shape.arch == Architecture::two_layer && shape.hidden < 1) {
        throw std::invalid_argument("network: hidden must be >= 1 for two_layer");
    }
}

void check_variances(double prior_var, double noise_var) {
    if (!(prior_var > 0.0)) throw std::invalid_argument("network: prior_var must be positive");
    if (!(noise_var > 0.0)) throw std::invalid_argument("network: noise_var must be positive");
}

// Draws the indices of one minibatch.
void draw_batch(std::size_t replay, const SgdConfig& sgd, SeededRng& rng, std::vector<std::size_t>& out) {
    out.clear();
    if (sgd.mode == MinibatchMode::full) {
        for (std::size_t i = 0; i < replay; ++i) out.push_back(i);
        return;
    }
    const std::size_t b = std::min(sgd.minibatch, replay);
    for (std::size_t i = 0; i < b; ++i) out.push_back(rng.index(replay));
}

// sgd.steps plain SGD iterations on the anchored loss. target(i) gives the
// stored target of observation i; masks, when non-null, produces one hidden
// scale per minibatch slot.
template <class TargetFn, class MaskFn>
void run_sgd(MlpParams& params, const MlpParams& anchor, const std::vector<Vector>& actions, TargetFn target,
             MaskFn&& draw_mask, bool use_masks, const SgdConfig& sgd, SeededRng& rng, double prior_var,
             double noise_var, Activation act) {
    if (actions.empty() || sgd.steps == 0) return;
    std::vector<std::size_t> idx;
    std::vector<SampleRef> batch;
    std::vector<Vector> masks;
    for (std::size_t step = 0; step < sgd.steps; ++step) {
        draw_batch(actions.size(), sgd, rng, idx);
        if (use_masks) {
            masks.clear();
            for (std::size_t s = 0; s < idx.size(); ++s) masks.push_back(draw_mask());
        }
        batch.clear();
        for (std::size_t s = 0; s < idx.size(); ++s) {
            batch.push_back({&actions[idx[s]], target(idx[s]), use_masks ? &masks[s] : nullptr});
        }
        double pv = prior_var;
        double nv = noise_var;
        if (sgd.scaling == LossScaling::normalized) {
            pv *= static_cast<double>(actions.size());
            nv *= static_cast<double>(batch.size());
        }
        const LossGradient lg = loss_and_gradient(params, anchor, std::span<const SampleRef>(batch), pv, nv, act);
        params.axpy(-sgd.learning_rate, lg.grad);
    }
    if (!params.all_finite()) {
        throw std::runtime_error("SGD diverged to non-finite weights; lower the learning rate");
    }
}

struct NoMask {
    Vector operator()() const { return {}; }
};

std::size_t greedy(const MlpParams& params, const ActionSet& actions, Activation act, const Vector* mask = nullptr) {
    return argmax_lowest(forward_all(params, actions, act, mask));
}

}  // namespace

Vector forward_all(const MlpParams& params, const ActionSet& actions, Activation act, const Vector* hidden_scale) {
    if (actions.dim() != params.input_dim()) throw std::invalid_argument("forward_all: input dimension mismatch");
    const Matrix& a = actions.matrix();
    if (params.arch == Architecture::neuron) {
        Vector z = a * params.w1.row(0).transpose();
        for (auto& x : z) x = activate(x, act);
        return z;
    }
    // K x D hidden pre-activations.
    Matrix h = a * params.w1.transpose();
    for (Eigen::Index k = 0; k < h.rows(); ++k) {
        for (Eigen::Index i = 0; i < h.cols(); ++i) {
            double v = activate(h(k, i), act);
            if (hidden_scale != nullptr) v *= (*hidden_scale)[i];
            h(k, i) = v;
        }
    }
    return h * params.w2;
}

NeuralEnsemble::NeuralEnsemble(NetShape shape, std::size_t num_models, double prior_var, double noise_var,
                               SgdConfig sgd, SeededRng& prior_rng, std::uint64_t minibatch_key)
    : shape_(shape), prior_var_(prior_var), noise_var_(noise_var), sgd_(sgd) {
    check_shape(shape_);
    check_variances(prior_var_, noise_var_);
    validate(sgd_);
    if (num_models < 1) throw std::invalid_argument("NeuralEnsemble: ensemble size must be >= 1");
    for (std::size_t m = 0; m < num_models; ++m) {
        anchors_.push_back(MlpParams::sample_prior(shape_.arch, shape_.input_dim, shape_.hidden, prior_var_, prior_rng));
        minibatch_rngs_.push_back(SeededRng::stream(minibatch_key, {m}));
    }
    models_ = anchors_;
}

double NeuralEnsemble::replay_target(std::size_t obs, std::size_t model) const {
    if (obs >= replay_size() || model >= size()) throw std::out_of_range("NeuralEnsemble: replay index out of range");
    return targets_[obs * size() + model];
}

void NeuralEnsemble::update(const Vector& a, double reward, std::span<const double> perturbations) {
    if (static_cast<std::size_t>(a.size()) != shape_.input_dim) {
        throw std::invalid_argument("NeuralEnsemble: input dimension mismatch");
    }
    if (perturbations.size() != size()) throw std::invalid_argument("NeuralEnsemble: need one perturbation per model");
    actions_.push_back(a);
    for (double w : perturbations) targets_.push_back(reward + w);
    const std::size_t num_models = size();
    for (std::size_t m = 0; m < num_models; ++m) {
        auto target = [&](std::size_t obs) { return targets_[obs * num_models + m]; };
        run_sgd(models_[m], anchors_[m], actions_, target, NoMask{}, false, sgd_, minibatch_rngs_[m], prior_var_,
                noise_var_, shape_.activation);
    }
}

void NeuralEnsemble::update(const Vector& a, double reward, SeededRng& rng) {
    std::vector<double> w(size());
    const double sd = std::sqrt(noise_var_);
    for (auto& x : w) x = sd * rng.normal();
    update(a, reward, w);
}

std::size_t NeuralEnsemble::select(const ActionSet& actions, SeededRng& rng) const {
    const std::size_t m = rng.index(size());
    return greedy(models_[m], actions, shape_.activation);
}

NeuralEnsemble neural_es_update(const NeuralEnsemble& ens, const Vector& a, double reward, SeededRng& rng) {
    NeuralEnsemble next = ens;
    next.update(a, reward, rng);
    return next;
}

std::size_t neural_es_select(const NeuralEnsemble& ens, const ActionSet& actions, SeededRng& rng) {
    return ens.select(actions, rng);
}

double EpsilonSchedule::at(std::size_t t) const noexcept {
    const double eps = kind == Kind::fixed ? value : value / (static_cast<double>(t) + 1.0);
    return std::clamp(eps, 0.0, 1.0);
}

void validate(const EpsilonSchedule& schedule) {
    if (!std::isfinite(schedule.value) || schedule.value < 0.0) {
        throw std::invalid_argument("epsilon schedule: value must be finite and >= 0");
    }
    if (schedule.kind == EpsilonSchedule::Kind::fixed && schedule.value > 1.0) {
        throw std::invalid_argument("epsilon schedule: fixed epsilon must lie in [0, 1]");
    }
}

EpsilonGreedyAgent::EpsilonGreedyAgent(NetShape shape, double prior_var, double noise_var, SgdConfig sgd,
                                       EpsilonSchedule schedule, SeededRng& prior_rng, std::uint64_t minibatch_key)
    : shape_(shape),
      prior_var_(prior_var),
      noise_var_(noise_var),
      sgd_(sgd),
      schedule_(schedule),
      minibatch_rng_(SeededRng::stream(minibatch_key, {0})) {
    check_shape(shape_);
    check_variances(prior_var_, noise_var_);
    validate(sgd_);
    validate(schedule_);
    anchor_ = MlpParams::sample_prior(shape_.arch, shape_.input_dim, shape_.hidden, prior_var_, prior_rng);
    net_ = anchor_;
}

void EpsilonGreedyAgent::update(const Vector& a, double reward) {
    if (static_cast<std::size_t>(a.size()) != shape_.input_dim) {
        throw std::invalid_argument("EpsilonGreedyAgent: input dimension mismatch");
    }
    actions_.push_back(a);
    rewards_.push_back(reward);
    run_sgd(net_, anchor_, actions_, [&](std::size_t obs) { return rewards_[obs]; }, NoMask{}, false, sgd_,
            minibatch_rng_, prior_var_, noise_var_, shape_.activation);
}

std::size_t EpsilonGreedyAgent::select(const ActionSet& actions, std::size_t t, SeededRng& rng) const {
    const double eps = schedule_.at(t);
    if (eps > 0.0 && rng.uniform(0.0, 1.0) < eps) return rng.index(actions.count());
    return greedy(net_, actions, shape_.activation);
}

std::size_t eps_select(const EpsilonGreedyAgent& agent, const ActionSet& actions, std::size_t t, SeededRng& rng) {
    return agent.select(actions, t, rng);
}

std::optional<double> default_dropout_learning_rate(double drop_prob) {
    if (drop_prob == 0.25) return 1e-2;
    if (drop_prob == 0.5) return 1e-2;
    if (drop_prob == 0.75) return 2e-2;
    if (drop_prob == 0.9) return 5e-2;
    return std::nullopt;
}

DropoutAgent::DropoutAgent(NetShape shape, double prior_var, double noise_var, SgdConfig sgd, double drop_prob,
                           SeededRng& prior_rng, std::uint64_t minibatch_key, std::uint64_t mask_key)
    : shape_(shape),
      prior_var_(prior_var),
      noise_var_(noise_var),
      sgd_(sgd),
      drop_prob_(drop_prob),
      minibatch_rng_(SeededRng::stream(minibatch_key, {0})),
      mask_rng_(SeededRng::stream(mask_key, {0})) {
    check_shape(shape_);
    check_variances(prior_var_, noise_var_);
    validate(sgd_);
    if (shape_.arch != Architecture::two_layer) throw std::invalid_argument("DropoutAgent: needs a two-layer network");
    if (!(drop_prob_ >= 0.0 && drop_prob_ < 1.0)) throw std::invalid_argument("DropoutAgent: drop_prob must be in [0, 1)");
    anchor_ = MlpParams::sample_prior(shape_.arch, shape_.input_dim, shape_.hidden, prior_var_, prior_rng);
    net_ = anchor_;
}

Vector DropoutAgent::sample_mask(SeededRng& rng) const {
    const double keep = 1.0 - drop_prob_;
    Vector mask(static_cast<Eigen::Index>(shape_.hidden));
    for (auto& x : mask) x = rng.bernoulli(keep) ? 1.0 : 0.0;
    return mask;
}

void DropoutAgent::update(const Vector& a, double reward) {
    if (static_cast<std::size_t>(a.size()) != shape_.input_dim) {
        throw std::invalid_argument("DropoutAgent: input dimension mismatch");
    }
    actions_.push_back(a);
    rewards_.push_back(reward);
    run_sgd(net_, anchor_, actions_, [&](std::size_t obs) { return rewards_[obs]; },
            [&] { return sample_mask(mask_rng_); }, true, sgd_, minibatch_rng_, prior_var_, noise_var_,
            shape_.activation);
}

std::size_t DropoutAgent::select(const ActionSet& actions, SeededRng& rng) const {
    const Vector mask = sample_mask(rng);
    return greedy(net_, actions, shape_.activation, &mask);
}

std::size_t dropout_select(const DropoutAgent& agent, const ActionSet& actions, SeededRng& rng) {
    return agent.select(actions, rng);
}

}  // namespace ensamp
