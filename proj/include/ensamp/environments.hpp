#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ensamp/gaussian.hpp"
#include "ensamp/rng.hpp"

namespace ensamp {

// K actions in R^N, one per row.
class ActionSet {
public:
    explicit ActionSet(Matrix rows);

    static ActionSet standard_basis(std::size_t k) { return ActionSet(Matrix::Identity(k, k)); }

    std::size_t count() const noexcept { return static_cast<std::size_t>(rows_.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(rows_.cols()); }
    Vector action(std::size_t k) const;
    const Matrix& matrix() const noexcept { return rows_; }

private:
    Matrix rows_;
};

// Coordinates 0..N-2 uniform on [-1, 1]; the last coordinate is fixed at 1.
ActionSet make_action_set(std::size_t count, std::size_t dim, SeededRng& rng);

// Lowest index among the maximizers.
std::size_t argmax_lowest(const Vector& scores);

enum class EnvFamily { independent_gaussian, linear, neuron, two_layer };

EnvFamily parse_env_family(std::string_view name);
std::string_view to_string(EnvFamily family);

struct OptimalAction {
    std::size_t index;
    double reward;
};

// Common contract: K actions with fixed mean rewards, Gaussian reward noise of
// variance noise_var. Immutable after construction.
class BanditEnv {
public:
    virtual ~BanditEnv() = default;

    virtual EnvFamily family() const noexcept = 0;

    const ActionSet& actions() const noexcept { return actions_; }
    std::size_t num_actions() const noexcept { return actions_.count(); }
    // Reward noise variance (sigma_w^2, written sigma_z^2 for the network bandits).
    double noise_var() const noexcept { return noise_var_; }

    double true_mean(std::size_t action) const;
    const Vector& true_means() const noexcept { return means_; }
    OptimalAction optimal() const;
    double worst() const;
    double gap() const { return optimal().reward - worst(); }

protected:
    BanditEnv(ActionSet actions, double noise_var);
    void set_means(Vector means);

private:
    ActionSet actions_;
    double noise_var_;
    Vector means_;
};

class LinearBanditEnv final : public BanditEnv {
public:
    LinearBanditEnv(Vector theta, ActionSet actions, double noise_var, Vector prior_mean, SpdMatrix prior_cov);

    EnvFamily family() const noexcept override { return EnvFamily::linear; }
    const Vector& theta() const noexcept { return theta_; }
    const Vector& prior_mean() const noexcept { return prior_mean_; }
    const SpdMatrix& prior_cov() const noexcept { return prior_cov_; }

private:
    Vector theta_;
    Vector prior_mean_;
    SpdMatrix prior_cov_;
};

// Linear bandit on the standard basis: action k has mean theta_k.
class IndependentGaussianEnv final : public BanditEnv {
public:
    IndependentGaussianEnv(Vector theta, double noise_var, double prior_var = 1.0);

    EnvFamily family() const noexcept override { return EnvFamily::independent_gaussian; }
    const Vector& theta() const noexcept { return theta_; }
    double prior_var() const noexcept { return prior_var_; }

private:
    Vector theta_;
    double prior_var_;
};

// Mean reward max(0, theta^T a).
class NeuronEnv final : public BanditEnv {
public:
    NeuronEnv(Vector theta, ActionSet actions, double prior_var, double noise_var);

    EnvFamily family() const noexcept override { return EnvFamily::neuron; }
    const Vector& theta() const noexcept { return theta_; }
    double prior_var() const noexcept { return prior_var_; }

private:
    Vector theta_;
    double prior_var_;
};

// Mean reward w2^T max(0, w1 a).
class TwoLayerNetEnv final : public BanditEnv {
public:
    TwoLayerNetEnv(Matrix w1, Vector w2, ActionSet actions, double prior_var, double noise_var);

    EnvFamily family() const noexcept override { return EnvFamily::two_layer; }
    const Matrix& w1() const noexcept { return w1_; }
    const Vector& w2() const noexcept { return w2_; }
    double prior_var() const noexcept { return prior_var_; }

private:
    Matrix w1_;
    Vector w2_;
    double prior_var_;
};

struct EnvSpec {
    EnvFamily family = EnvFamily::independent_gaussian;
    std::size_t num_actions = 10;  // K
    std::size_t dim = 0;           // N; ignored for independent_gaussian (N = K)
    std::size_t hidden = 0;        // D; two_layer only
    double prior_var = 1.0;        // lambda (entrywise prior variance)
    double noise_var = 1.0;

    // Feature dimension seen by agents.
    std::size_t feature_dim() const { return family == EnvFamily::independent_gaussian ? num_actions : dim; }
};

void validate(const EnvSpec& spec);

// Draws actions and ground truth from the family's prior.
std::unique_ptr<BanditEnv> sample_env_from_prior(const EnvSpec& spec, SeededRng& rng);

enum class NoiseMode { fresh, coupled };

NoiseMode parse_noise_mode(std::string_view name);
std::string_view to_string(NoiseMode mode);

// Standard normal noise source. In coupled mode the value for (n, a) or
// (n, a, m) is a pure function of the base seed and the key, with n the number
// of earlier pulls of action a. In fresh mode values come from the caller's rng.
class NoiseTable {
public:
    NoiseTable(NoiseMode mode, std::uint64_t base_seed) noexcept : mode_(mode), base_seed_(base_seed) {}

    NoiseMode mode() const noexcept { return mode_; }
    std::uint64_t base_seed() const noexcept { return base_seed_; }

    double reward(std::size_t n, std::size_t action, SeededRng& fresh) const;
    double perturbation(std::size_t n, std::size_t action, std::size_t model, SeededRng& fresh) const;

private:
    NoiseMode mode_;
    std::uint64_t base_seed_;
};

using ActionCounts = std::vector<std::size_t>;

// Mean reward plus sqrt(noise_var) * Z, Z taken from `noise` at key
// (counts[action], action). Increments counts[action].
double step(const BanditEnv& env, std::size_t action, ActionCounts& counts, const NoiseTable& noise, SeededRng& rng);

}  // namespace ensamp
