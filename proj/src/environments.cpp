#include "ensamp/environments.hpp"

#include <cmath>
#include <stdexcept>

namespace ensamp {

ActionSet::ActionSet(Matrix rows) : rows_(std::move(rows)) {
    if (rows_.rows() < 1 || rows_.cols() < 1) throw std::invalid_argument("ActionSet: need K >= 1 and N >= 1");
    if (!rows_.allFinite()) throw std::invalid_argument("ActionSet: non-finite entry");
}

Vector ActionSet::action(std::size_t k) const {
    if (k >= count()) throw std::out_of_range("ActionSet: action index out of range");
    return rows_.row(static_cast<Eigen::Index>(k)).transpose();
}

ActionSet make_action_set(std::size_t count, std::size_t dim, SeededRng& rng) {
    if (count < 1 || dim < 1) throw std::invalid_argument("make_action_set: need K >= 1 and N >= 1");
    Matrix rows(count, dim);
    for (std::size_t k = 0; k < count; ++k) {
        for (std::size_t i = 0; i + 1 < dim; ++i) rows(k, i) = rng.uniform(-1.0, 1.0);
        rows(k, dim - 1) = 1.0;
    }
    return ActionSet(std::move(rows));
}

std::size_t argmax_lowest(const Vector& scores) {
    if (scores.size() == 0) throw std::invalid_argument("argmax_lowest: empty input");
    std::size_t best = 0;
    for (Eigen::Index k = 1; k < scores.size(); ++k) {
        if (scores[k] > scores[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(k);
    }
    return best;
}

EnvFamily parse_env_family(std::string_view name) {
    if (name == "independent_gaussian") return EnvFamily::independent_gaussian;
    if (name == "linear") return EnvFamily::linear;
    if (name == "neuron") return EnvFamily::neuron;
    if (name == "two_layer") return EnvFamily::two_layer;
    throw std::invalid_argument("unknown environment family '" + std::string(name) + "'");
}

std::string_view to_string(EnvFamily family) {
    switch (family) {
        case EnvFamily::independent_gaussian: return "independent_gaussian";
        case EnvFamily::linear: return "linear";
        case EnvFamily::neuron: return "neuron";
        case EnvFamily::two_layer: return "two_layer";
    }
    return "?";
}

BanditEnv::BanditEnv(ActionSet actions, double noise_var) : actions_(std::move(actions)), noise_var_(noise_var) {
    if (!(noise_var_ > 0.0) || !std::isfinite(noise_var_)) {
        throw std::invalid_argument("environment: noise_var must be positive and finite");
    }
}

void BanditEnv::set_means(Vector means) {
    if (static_cast<std::size_t>(means.size()) != actions_.count() || !means.allFinite()) {
        throw std::invalid_argument("environment: invalid mean rewards");
    }
    means_ = std::move(means);
}

double BanditEnv::true_mean(std::size_t action) const {
    if (action >= num_actions()) throw std::out_of_range("environment: action index out of range");
    return means_[static_cast<Eigen::Index>(action)];
}

OptimalAction BanditEnv::optimal() const {
    const std::size_t best = argmax_lowest(means_);
    return {best, means_[static_cast<Eigen::Index>(best)]};
}

double BanditEnv::worst() const { return means_.minCoeff(); }

LinearBanditEnv::LinearBanditEnv(Vector theta, ActionSet actions, double noise_var, Vector prior_mean,
                                 SpdMatrix prior_cov)
    : BanditEnv(std::move(actions), noise_var),
      theta_(std::move(theta)),
      prior_mean_(std::move(prior_mean)),
      prior_cov_(std::move(prior_cov)) {
    const auto n = this->actions().dim();
    if (static_cast<std::size_t>(theta_.size()) != n || static_cast<std::size_t>(prior_mean_.size()) != n ||
        prior_cov_.dim() != n) {
        throw std::invalid_argument("LinearBanditEnv: dimension mismatch");
    }
    set_means(this->actions().matrix() * theta_);
}

IndependentGaussianEnv::IndependentGaussianEnv(Vector theta, double noise_var, double prior_var)
    : BanditEnv(ActionSet::standard_basis(static_cast<std::size_t>(theta.size())), noise_var),
      theta_(std::move(theta)),
      prior_var_(prior_var) {
    if (!(prior_var_ > 0.0)) throw std::invalid_argument("IndependentGaussianEnv: prior_var must be positive");
    set_means(theta_);
}

NeuronEnv::NeuronEnv(Vector theta, ActionSet actions, double prior_var, double noise_var)
    : BanditEnv(std::move(actions), noise_var), theta_(std::move(theta)), prior_var_(prior_var) {
    if (static_cast<std::size_t>(theta_.size()) != this->actions().dim()) {
        throw std::invalid_argument("NeuronEnv: dimension mismatch");
    }
    set_means((this->actions().matrix() * theta_).cwiseMax(0.0));
}

TwoLayerNetEnv::TwoLayerNetEnv(Matrix w1, Vector w2, ActionSet actions, double prior_var, double noise_var)
    : BanditEnv(std::move(actions), noise_var), w1_(std::move(w1)), w2_(std::move(w2)), prior_var_(prior_var) {
    if (static_cast<std::size_t>(w1_.cols()) != this->actions().dim() || w1_.rows() != w2_.size()) {
        throw std::invalid_argument("TwoLayerNetEnv: dimension mismatch");
    }
    // Rows of (A W1^T) are the hidden pre-activations of each action.
    const Matrix hidden = (this->actions().matrix() * w1_.transpose()).cwiseMax(0.0);
    set_means(hidden * w2_);
}

void validate(const EnvSpec& spec) {
    if (spec.num_actions < 1) throw std::invalid_argument("env: num_actions must be >= 1");
    if (spec.family != EnvFamily::independent_gaussian && spec.dim < 1) {
        throw std::invalid_argument("env: dim must be >= 1");
    }
    if (spec.family == EnvFamily::two_layer && spec.hidden < 1) {
        throw std::invalid_argument("env: hidden must be >= 1 for two_layer");
    }
    if (!(spec.prior_var > 0.0) || !std::isfinite(spec.prior_var)) {
        throw std::invalid_argument("env: prior_var must be positive");
    }
    if (!(spec.noise_var > 0.0) || !std::isfinite(spec.noise_var)) {
        throw std::invalid_argument("env: noise_var must be positive");
    }
}

namespace {

Vector normal_vector(std::size_t n, double sd, SeededRng& rng) {
    Vector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = sd * rng.normal();
    return v;
}

}  // namespace

std::unique_ptr<BanditEnv> sample_env_from_prior(const EnvSpec& spec, SeededRng& rng) {
    validate(spec);
    const double sd = std::sqrt(spec.prior_var);
    switch (spec.family) {
        case EnvFamily::independent_gaussian:
            return std::make_unique<IndependentGaussianEnv>(normal_vector(spec.num_actions, sd, rng), spec.noise_var,
                                                            spec.prior_var);
        case EnvFamily::linear: {
            ActionSet actions = make_action_set(spec.num_actions, spec.dim, rng);
            Vector theta = normal_vector(spec.dim, sd, rng);
            return std::make_unique<LinearBanditEnv>(std::move(theta), std::move(actions), spec.noise_var,
                                                     Vector::Zero(static_cast<Eigen::Index>(spec.dim)),
                                                     SpdMatrix::scaled_identity(spec.dim, spec.prior_var));
        }
        case EnvFamily::neuron: {
            ActionSet actions = make_action_set(spec.num_actions, spec.dim, rng);
            Vector theta = normal_vector(spec.dim, sd, rng);
            return std::make_unique<NeuronEnv>(std::move(theta), std::move(actions), spec.prior_var, spec.noise_var);
        }
        case EnvFamily::two_layer: {
            ActionSet actions = make_action_set(spec.num_actions, spec.dim, rng);
            Matrix w1(static_cast<Eigen::Index>(spec.hidden), static_cast<Eigen::Index>(spec.dim));
            for (Eigen::Index i = 0; i < w1.rows(); ++i) {
                for (Eigen::Index j = 0; j < w1.cols(); ++j) w1(i, j) = sd * rng.normal();
            }
            Vector w2 = normal_vector(spec.hidden, sd, rng);
            return std::make_unique<TwoLayerNetEnv>(std::move(w1), std::move(w2), std::move(actions), spec.prior_var,
                                                    spec.noise_var);
        }
    }
    throw std::invalid_argument("sample_env_from_prior: unknown family");
}

NoiseMode parse_noise_mode(std::string_view name) {
    if (name == "fresh") return NoiseMode::fresh;
    if (name == "coupled") return NoiseMode::coupled;
    throw std::invalid_argument("unknown noise mode '" + std::string(name) + "'");
}

std::string_view to_string(NoiseMode mode) { return mode == NoiseMode::fresh ? "fresh" : "coupled"; }

double NoiseTable::reward(std::size_t n, std::size_t action, SeededRng& fresh) const {
    if (mode_ == NoiseMode::fresh) return fresh.normal();
    SeededRng cell = SeededRng::stream(base_seed_, {role_id(StreamRole::coupled_reward), n, action});
    return cell.normal();
}

double NoiseTable::perturbation(std::size_t n, std::size_t action, std::size_t model, SeededRng& fresh) const {
    if (mode_ == NoiseMode::fresh) return fresh.normal();
    SeededRng cell = SeededRng::stream(base_seed_, {role_id(StreamRole::coupled_perturbation), n, action, model});
    return cell.normal();
}

double step(const BanditEnv& env, std::size_t action, ActionCounts& counts, const NoiseTable& noise,
            SeededRng& rng) {
    if (action >= env.num_actions()) throw std::out_of_range("step: action index out of range");
    if (counts.size() != env.num_actions()) throw std::invalid_argument("step: counts size must equal K");
    const double z = noise.reward(counts[action], action, rng);
    ++counts[action];
    return env.true_mean(action) + std::sqrt(env.noise_var()) * z;
}

}  // namespace ensamp
