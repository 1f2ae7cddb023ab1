#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ensamp/environments.hpp"
#include "ensamp/gaussian.hpp"
#include "ensamp/rng.hpp"

namespace ensamp {

// Probability vector over K actions. Entries >= 0, sum 1 within 1e-12.
class ActionDistribution {
public:
    explicit ActionDistribution(std::vector<double> probs);

    // Counts normalized by their total.
    static ActionDistribution from_counts(std::span<const std::size_t> counts);

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t a) const { return probs_.at(a); }
    const std::vector<double>& probs() const noexcept { return probs_; }

    friend bool operator==(const ActionDistribution&, const ActionDistribution&) = default;

private:
    std::vector<double> probs_;
};

// Exact posterior N(mean, cov) of a linear-Gaussian model with known noise.
class GaussianBelief {
public:
    GaussianBelief(Vector mean, SpdMatrix cov, double noise_var);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }
    const Vector& mean() const noexcept { return mean_; }
    const SpdMatrix& cov() const noexcept { return cov_; }
    double noise_var() const noexcept { return noise_var_; }

    // Conjugate update after observing reward r for action a. Uses the gain
    // form mean += cov a (r - a^T mean) / (noise_var + a^T cov a).
    void update(const Vector& a, double r);

    friend bool operator==(const GaussianBelief& x, const GaussianBelief& y) {
        return x.noise_var_ == y.noise_var_ && x.mean_ == y.mean_ && x.cov_.matrix() == y.cov_.matrix();
    }

private:
    Vector mean_;
    SpdMatrix cov_;
    double noise_var_;
};

GaussianBelief ts_update(const GaussianBelief& belief, const Vector& a, double r);

// Draws theta ~ N(mean, cov) and returns the greedy action for it.
std::size_t ts_select(const GaussianBelief& belief, const ActionSet& actions, SeededRng& rng);

// One recorded observation of a linear ensemble: action, reward, and the
// perturbation each model added to the reward.
struct EnsembleObservation {
    Vector action;
    double reward;
    std::vector<double> perturbations;
};

// M perturbed models sharing one covariance. Models are the columns of an
// N x M matrix.
class LinearEnsemble {
public:
    // M i.i.d. draws from N(prior_mean, prior_cov), drawn in model order from rng.
    // With keep_history the anchors and every observation are retained for
    // batch_fit checks.
    static LinearEnsemble init(const Vector& prior_mean, const SpdMatrix& prior_cov, double noise_var,
                               std::size_t num_models, SeededRng& rng, bool keep_history = false);

    std::size_t size() const noexcept { return static_cast<std::size_t>(models_.cols()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(models_.rows()); }
    Vector model(std::size_t m) const;
    const Matrix& models() const noexcept { return models_; }
    const SpdMatrix& cov() const noexcept { return cov_; }
    const SpdMatrix& prior_cov() const noexcept { return prior_cov_; }
    double noise_var() const noexcept { return noise_var_; }

    bool keeps_history() const noexcept { return keep_history_; }
    // Empty unless keep_history was requested.
    const Matrix& anchors() const noexcept { return anchors_; }
    const std::vector<EnsembleObservation>& history() const noexcept { return history_; }

    // theta_m <- cov' (cov^-1 theta_m + a (r + w_m) / noise_var) for every m,
    // where w_m = perturbations[m] ~ N(0, noise_var); then cov <- cov'.
    void update(const Vector& a, double r, std::span<const double> perturbations);

    friend bool operator==(const LinearEnsemble& x, const LinearEnsemble& y) {
        return x.noise_var_ == y.noise_var_ && x.models_ == y.models_ && x.cov_.matrix() == y.cov_.matrix();
    }

private:
    LinearEnsemble(Matrix models, SpdMatrix prior_cov, double noise_var, bool keep_history);

    Matrix models_;
    SpdMatrix cov_;
    SpdMatrix prior_cov_;
    double noise_var_;
    bool keep_history_;
    Matrix anchors_;
    std::vector<EnsembleObservation> history_;
};

LinearEnsemble es_init(const Vector& prior_mean, const SpdMatrix& prior_cov, double noise_var,
                       std::size_t num_models, SeededRng& rng);

LinearEnsemble es_update(const LinearEnsemble& ens, const Vector& a, double r, std::span<const double> perturbations);

struct BatchObservation {
    Vector action;
    double reward;
    double perturbation;
};

// Closed-form minimizer of
//   (1/noise_var) sum (r + w - a^T v)^2 + (v - anchor)^T prior_cov^-1 (v - anchor).
Vector batch_fit(const Vector& anchor, std::span<const BatchObservation> history, const SpdMatrix& prior_cov,
                 double noise_var);

// History of model m in the form batch_fit expects. Requires keep_history.
std::vector<BatchObservation> model_history(const LinearEnsemble& ens, std::size_t m);

// Uniform model, then its greedy action.
std::size_t es_select(const LinearEnsemble& ens, const ActionSet& actions, SeededRng& rng);

// Fraction of models whose greedy action is a (ties to the lowest index).
ActionDistribution ensemble_action_dist(const LinearEnsemble& ens, const ActionSet& actions);

}  // namespace ensamp
