#include "ensamp/linear_agents.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ensamp {

ActionDistribution::ActionDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw std::invalid_argument("ActionDistribution: empty");
    double total = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("ActionDistribution: negative or non-finite entry");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("ActionDistribution: entries must sum to 1");
}

ActionDistribution ActionDistribution::from_counts(std::span<const std::size_t> counts) {
    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    if (!(total > 0.0)) throw std::invalid_argument("ActionDistribution: counts sum to zero");
    std::vector<double> probs(counts.size());
    for (std::size_t a = 0; a < counts.size(); ++a) probs[a] = static_cast<double>(counts[a]) / total;
    return ActionDistribution(std::move(probs));
}

GaussianBelief::GaussianBelief(Vector mean, SpdMatrix cov, double noise_var)
    : mean_(std::move(mean)), cov_(std::move(cov)), noise_var_(noise_var) {
    if (dim() != cov_.dim()) throw std::invalid_argument("GaussianBelief: dimension mismatch");
    if (!(noise_var_ > 0.0)) throw std::invalid_argument("GaussianBelief: noise_var must be positive");
    if (!mean_.allFinite()) throw std::invalid_argument("GaussianBelief: non-finite mean");
}

void GaussianBelief::update(const Vector& a, double r) {
    if (static_cast<std::size_t>(a.size()) != dim()) throw std::invalid_argument("ts_update: dimension mismatch");
    const Vector u = cov_.matrix() * a;
    const double s = noise_var_ + a.dot(u);
    mean_ += u * ((r - a.dot(mean_)) / s);
    cov_ = precision_rank_one_update(cov_, a, noise_var_);
}

GaussianBelief ts_update(const GaussianBelief& belief, const Vector& a, double r) {
    GaussianBelief next = belief;
    next.update(a, r);
    return next;
}

std::size_t ts_select(const GaussianBelief& belief, const ActionSet& actions, SeededRng& rng) {
    if (actions.dim() != belief.dim()) throw std::invalid_argument("ts_select: dimension mismatch");
    const Vector theta = sample_gaussian(belief.mean(), belief.cov(), rng);
    return argmax_lowest(actions.matrix() * theta);
}

LinearEnsemble::LinearEnsemble(Matrix models, SpdMatrix prior_cov, double noise_var, bool keep_history)
    : models_(std::move(models)),
      cov_(prior_cov),
      prior_cov_(std::move(prior_cov)),
      noise_var_(noise_var),
      keep_history_(keep_history) {
    if (keep_history_) anchors_ = models_;
}

LinearEnsemble LinearEnsemble::init(const Vector& prior_mean, const SpdMatrix& prior_cov, double noise_var,
                                    std::size_t num_models, SeededRng& rng, bool keep_history) {
    if (num_models < 1) throw std::invalid_argument("es_init: ensemble size must be >= 1");
    if (!(noise_var > 0.0)) throw std::invalid_argument("es_init: noise_var must be positive");
    const GaussianSampler prior(prior_mean, prior_cov);
    Matrix models(prior_mean.size(), static_cast<Eigen::Index>(num_models));
    for (Eigen::Index m = 0; m < models.cols(); ++m) models.col(m) = prior(rng);
    return LinearEnsemble(std::move(models), prior_cov, noise_var, keep_history);
}

Vector LinearEnsemble::model(std::size_t m) const {
    if (m >= size()) throw std::out_of_range("LinearEnsemble: model index out of range");
    return models_.col(static_cast<Eigen::Index>(m));
}

void LinearEnsemble::update(const Vector& a, double r, std::span<const double> perturbations) {
    if (static_cast<std::size_t>(a.size()) != dim()) throw std::invalid_argument("es_update: dimension mismatch");
    if (perturbations.size() != size()) throw std::invalid_argument("es_update: need one perturbation per model");
    const Vector u = cov_.matrix() * a;
    const double s = noise_var_ + a.dot(u);
    // Per-model residuals r + w_m - a^T theta_m, scaled by 1/s.
    Eigen::RowVectorXd residual = -(a.transpose() * models_);
    for (Eigen::Index m = 0; m < residual.size(); ++m) {
        residual[m] = (residual[m] + r + perturbations[static_cast<std::size_t>(m)]) / s;
    }
    models_.noalias() += u * residual;
    cov_ = precision_rank_one_update(cov_, a, noise_var_);
    if (keep_history_) history_.push_back({a, r, std::vector<double>(perturbations.begin(), perturbations.end())});
}

LinearEnsemble es_init(const Vector& prior_mean, const SpdMatrix& prior_cov, double noise_var,
                       std::size_t num_models, SeededRng& rng) {
    return LinearEnsemble::init(prior_mean, prior_cov, noise_var, num_models, rng);
}

LinearEnsemble es_update(const LinearEnsemble& ens, const Vector& a, double r, std::span<const double> perturbations) {
    LinearEnsemble next = ens;
    next.update(a, r, perturbations);
    return next;
}

Vector batch_fit(const Vector& anchor, std::span<const BatchObservation> history, const SpdMatrix& prior_cov,
                 double noise_var) {
    if (!(noise_var > 0.0)) throw std::invalid_argument("batch_fit: noise_var must be positive");
    const Eigen::Index n = anchor.size();
    if (static_cast<std::size_t>(n) != prior_cov.dim()) throw std::invalid_argument("batch_fit: dimension mismatch");
    const Eigen::LLT<Matrix> prior_llt(prior_cov.matrix());
    if (prior_llt.info() != Eigen::Success) throw std::invalid_argument("batch_fit: prior covariance is not SPD");
    const Matrix prior_precision = prior_llt.solve(Matrix::Identity(n, n));

    Matrix precision = prior_precision;
    Vector rhs = prior_precision * anchor;
    for (const auto& obs : history) {
        if (obs.action.size() != n) throw std::invalid_argument("batch_fit: dimension mismatch");
        precision.noalias() += obs.action * obs.action.transpose() / noise_var;
        rhs += obs.action * ((obs.reward + obs.perturbation) / noise_var);
    }
    return precision.llt().solve(rhs);
}

std::vector<BatchObservation> model_history(const LinearEnsemble& ens, std::size_t m) {
    if (!ens.keeps_history()) throw std::logic_error("model_history: ensemble was built without history");
    if (m >= ens.size()) throw std::out_of_range("model_history: model index out of range");
    std::vector<BatchObservation> out;
    out.reserve(ens.history().size());
    for (const auto& obs : ens.history()) out.push_back({obs.action, obs.reward, obs.perturbations[m]});
    return out;
}

std::size_t es_select(const LinearEnsemble& ens, const ActionSet& actions, SeededRng& rng) {
    if (actions.dim() != ens.dim()) throw std::invalid_argument("es_select: dimension mismatch");
    const std::size_t m = rng.index(ens.size());
    return argmax_lowest(actions.matrix() * ens.models().col(static_cast<Eigen::Index>(m)));
}

ActionDistribution ensemble_action_dist(const LinearEnsemble& ens, const ActionSet& actions) {
    if (actions.dim() != ens.dim()) throw std::invalid_argument("ensemble_action_dist: dimension mismatch");
    const Matrix scores = actions.matrix() * ens.models();
    std::vector<std::size_t> counts(actions.count(), 0);
    for (Eigen::Index m = 0; m < scores.cols(); ++m) ++counts[argmax_lowest(scores.col(m))];
    return ActionDistribution::from_counts(counts);
}

}  // namespace ensamp
