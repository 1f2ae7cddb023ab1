#include "ensamp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "ensamp/environments.hpp"
#include "ensamp/linear_agents.hpp"
#include "ensamp/mlp.hpp"
#include "ensamp/stats.hpp"

namespace ensamp {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

Vector normal_vector(std::size_t n, SeededRng& rng, double scale = 1.0) {
    Vector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = scale * rng.normal();
    return v;
}

SpdMatrix random_spd(std::size_t n, SeededRng& rng) {
    Matrix b(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (auto& x : b.reshaped()) x = rng.normal();
    Matrix m = b * b.transpose() / static_cast<double>(n);
    m = 0.5 * (m + m.transpose()).eval();
    m.diagonal().array() += 0.5;
    return SpdMatrix(std::move(m));
}

std::vector<double> scaled_normals(std::size_t count, double sd, SeededRng& rng) {
    std::vector<double> w(count);
    for (auto& x : w) x = sd * rng.normal();
    return w;
}

}  // namespace

SuiteResult verify_incremental_batch(std::uint64_t seed, std::size_t histories, double tol) {
    double worst = 0.0;
    for (std::size_t h = 0; h < histories; ++h) {
        SeededRng rng = SeededRng::stream(seed, {role_id(StreamRole::test), 1, h});
        const std::size_t n = 1 + rng.index(10);
        const std::size_t horizon = 1 + rng.index(50);
        const std::size_t models = 1 + rng.index(5);
        const double noise_var = rng.uniform(0.25, 4.0);
        const SpdMatrix prior_cov = random_spd(n, rng);
        const Vector prior_mean = normal_vector(n, rng);
        LinearEnsemble ens = LinearEnsemble::init(prior_mean, prior_cov, noise_var, models, rng, true);
        for (std::size_t t = 0; t < horizon; ++t) {
            const Vector a = normal_vector(n, rng);
            const double r = 2.0 * rng.normal();
            ens.update(a, r, scaled_normals(models, std::sqrt(noise_var), rng));
        }
        for (std::size_t m = 0; m < models; ++m) {
            const auto history = model_history(ens, m);
            const Vector batch = batch_fit(ens.anchors().col(static_cast<Eigen::Index>(m)), history, prior_cov, noise_var);
            const double err = (ens.model(m) - batch).norm() / std::max(batch.norm(), 1e-300);
            worst = std::max(worst, err);
        }
    }
    return {"incremental-batch", worst <= tol,
            fmt("%.0f histories, max relative error %.3g", static_cast<double>(histories), worst)};
}

SuiteResult verify_posterior_match(std::uint64_t seed, std::size_t dim, std::size_t models, std::size_t steps) {
    SeededRng rng = SeededRng::stream(seed, {role_id(StreamRole::test), 2});
    const double noise_var = 1.0;
    const Vector prior_mean = Vector::Zero(static_cast<Eigen::Index>(dim));
    const SpdMatrix prior_cov = SpdMatrix::identity(dim);
    const Vector theta = normal_vector(dim, rng);

    GaussianBelief belief(prior_mean, prior_cov, noise_var);
    LinearEnsemble ens = LinearEnsemble::init(prior_mean, prior_cov, noise_var, models, rng);
    for (std::size_t t = 0; t < steps; ++t) {
        Vector a = Vector::Zero(static_cast<Eigen::Index>(dim));
        a[static_cast<Eigen::Index>(t % dim)] = 1.0;
        a[static_cast<Eigen::Index>((t + 1) % dim)] += 0.5;
        const double r = a.dot(theta) + rng.normal();
        belief.update(a, r);
        ens.update(a, r, scaled_normals(models, std::sqrt(noise_var), rng));
    }

    const Matrix& samples = ens.models();
    const Vector mean = samples.rowwise().mean();
    const Matrix centred = samples.colwise() - mean;
    const Matrix cov = centred * centred.transpose() / static_cast<double>(models - 1);

    double worst_z = 0.0;
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
        const double band = std::sqrt(belief.cov()(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) /
                                      static_cast<double>(models));
        worst_z = std::max(worst_z, std::abs(mean[i] - belief.mean()[i]) / band);
    }
    const double cov_err = (cov - belief.cov().matrix()).norm() / belief.cov().matrix().norm();
    const bool ok = worst_z <= 4.0 && cov_err <= 0.10;
    return {"posterior-match", ok, fmt("max mean deviation %.3g band units (limit 4), covariance error %.3g (limit 0.1)",
                                       worst_z, cov_err)};
}

SuiteResult verify_count_invariance(std::uint64_t seed) {
    SeededRng rng = SeededRng::stream(seed, {role_id(StreamRole::test), 3});
    const std::size_t k = 5;
    const std::size_t models = 8;
    const double noise_var = 0.7;
    const IndependentGaussianEnv env(normal_vector(k, rng), noise_var);
    const NoiseTable noise(NoiseMode::coupled, stream_key(seed, {role_id(StreamRole::test), 3, 1}));
    const std::uint64_t prior_key = stream_key(seed, {role_id(StreamRole::test), 3, 2});

    std::vector<std::size_t> first;
    const std::size_t counts[k] = {3, 1, 4, 1, 5};
    for (std::size_t a = 0; a < k; ++a) first.insert(first.end(), counts[a], a);
    std::vector<std::size_t> second = first;
    std::reverse(second.begin(), second.end());
    for (std::size_t i = second.size(); i > 1; --i) std::swap(second[i - 1], second[rng.index(i)]);

    struct Outcome {
        GaussianBelief belief;
        LinearEnsemble ensemble;
    };
    auto replay = [&](const std::vector<std::size_t>& order) {
        GaussianBelief belief(Vector::Zero(k), SpdMatrix::identity(k), noise_var);
        SeededRng prior_rng(prior_key);
        LinearEnsemble ens = LinearEnsemble::init(Vector::Zero(k), SpdMatrix::identity(k), noise_var, models, prior_rng);
        ActionCounts pulls(k, 0);
        SeededRng unused(0);
        std::vector<double> w(models);
        for (std::size_t a : order) {
            const std::size_t n = pulls[a];
            const double r = step(env, a, pulls, noise, unused);
            for (std::size_t m = 0; m < models; ++m) w[m] = std::sqrt(noise_var) * noise.perturbation(n, a, m, unused);
            belief.update(env.actions().action(a), r);
            ens.update(env.actions().action(a), r, w);
        }
        return Outcome{belief, ens};
    };
    const Outcome x = replay(first);
    const Outcome y = replay(second);
    const bool same_belief = x.belief == y.belief;
    const bool same_ensemble = x.ensemble == y.ensemble;
    const bool same_p = exact_p_independent(x.belief) == exact_p_independent(y.belief);
    const bool same_p_hat = ensemble_action_dist(x.ensemble, env.actions()) ==
                            ensemble_action_dist(y.ensemble, env.actions());
    const bool ok = first != second && same_belief && same_ensemble && same_p && same_p_hat;
    std::string detail = std::string("belief ") + (same_belief ? "identical" : "differs") + ", ensemble " +
                         (same_ensemble ? "identical" : "differs") + ", p " + (same_p ? "identical" : "differs") +
                         ", p_hat " + (same_p_hat ? "identical" : "differs");
    return {"count-invariance", ok, detail};
}

SuiteResult verify_kl_concentration(std::uint64_t seed, std::size_t redraws, std::vector<std::size_t> sizes,
                                    double kl_limit, std::vector<KlConcentrationPoint>* points) {
    if (sizes.empty() || redraws < 2) throw std::invalid_argument("verify_kl_concentration: need sizes and >= 2 redraws");
    SeededRng rng = SeededRng::stream(seed, {role_id(StreamRole::test), 4});
    const std::size_t k = 5;
    const std::size_t observations = 50;
    const double noise_var = 1.0;
    const IndependentGaussianEnv env(normal_vector(k, rng), noise_var);
    const NoiseTable noise(NoiseMode::fresh, 0);

    struct Obs {
        std::size_t action;
        double reward;
    };
    std::vector<Obs> history;
    ActionCounts pulls(k, 0);
    GaussianBelief belief(Vector::Zero(k), SpdMatrix::identity(k), noise_var);
    for (std::size_t t = 0; t < observations; ++t) {
        const std::size_t a = t % k;
        const double r = step(env, a, pulls, noise, rng);
        history.push_back({a, r});
        belief.update(env.actions().action(a), r);
    }
    const ActionDistribution p = exact_p_independent(belief);

    std::vector<KlConcentrationPoint> curve;
    for (std::size_t models : sizes) {
        std::vector<double> kls(redraws);
        for (std::size_t d = 0; d < redraws; ++d) {
            SeededRng draw_rng = SeededRng::stream(seed, {role_id(StreamRole::test), 4, models, d});
            LinearEnsemble ens =
                LinearEnsemble::init(Vector::Zero(k), SpdMatrix::identity(k), noise_var, models, draw_rng);
            for (const Obs& o : history) {
                ens.update(env.actions().action(o.action), o.reward,
                           scaled_normals(models, std::sqrt(noise_var), draw_rng));
            }
            kls[d] = kl_divergence(ensemble_action_dist(ens, env.actions()), p);
        }
        const MeanStderr ms = mean_stderr(kls);
        curve.push_back({models, ms.mean, ms.stderr});
    }

    bool decreasing = true;
    for (std::size_t i = 1; i < curve.size(); ++i) decreasing = decreasing && curve[i].mean_kl < curve[i - 1].mean_kl;
    const bool ok = decreasing && curve.back().mean_kl < kl_limit;
    std::string detail = "mean KL by M:";
    for (const auto& c : curve) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " %zu=%.3g", c.models, c.mean_kl);
        detail += buf;
    }
    if (points) *points = std::move(curve);
    return {"kl-concentration", ok, detail};
}

SuiteResult verify_gradient_check(std::uint64_t seed, std::size_t points, double tol) {
    constexpr double h = 1e-5;
    double worst = 0.0;
    std::size_t checked = 0;
    for (Architecture arch : {Architecture::neuron, Architecture::two_layer}) {
        for (std::size_t p = 0; p < points; ++p) {
            SeededRng rng = SeededRng::stream(seed, {role_id(StreamRole::test), 5, static_cast<std::uint64_t>(arch), p});
            const std::size_t n = 2 + rng.index(5);
            const std::size_t hidden = arch == Architecture::neuron ? 1 : 2 + rng.index(4);
            const double prior_var = rng.uniform(0.5, 5.0);
            const double noise_var = rng.uniform(0.5, 5.0);
            std::vector<TrainingSample> batch;
            for (std::size_t i = 0; i < 8; ++i) batch.push_back({normal_vector(n, rng), 2.0 * rng.normal()});
            const MlpParams anchor = MlpParams::sample_prior(arch, n, hidden, 1.0, rng);

            // Redraw until every pre-activation is far enough from the kink
            // that a step of h cannot cross it.
            MlpParams params;
            for (int attempt = 0;; ++attempt) {
                if (attempt == 1000) throw std::runtime_error("verify_gradient_check: no kink-free point found");
                params = MlpParams::sample_prior(arch, n, hidden, 1.0, rng);
                bool clear = true;
                for (const auto& s : batch) {
                    const Vector z = params.w1 * s.action;
                    const double reach = 100.0 * h * s.action.cwiseAbs().maxCoeff();
                    clear = clear && (z.cwiseAbs().array() > reach).all();
                }
                if (clear) break;
            }

            const LossGradient analytic = loss_and_gradient(params, anchor, batch, prior_var, noise_var);
            const Vector g = analytic.grad.flatten();
            const Vector base = params.flatten();
            Vector numeric(base.size());
            MlpParams probe = params;
            for (Eigen::Index i = 0; i < base.size(); ++i) {
                Vector shifted = base;
                shifted[i] = base[i] + h;
                probe.assign_flat(shifted);
                const double up = loss_and_gradient(probe, anchor, batch, prior_var, noise_var).loss;
                shifted[i] = base[i] - h;
                probe.assign_flat(shifted);
                const double down = loss_and_gradient(probe, anchor, batch, prior_var, noise_var).loss;
                numeric[i] = (up - down) / (2.0 * h);
            }
            worst = std::max(worst, (g - numeric).norm() / std::max(numeric.norm(), 1e-12));
            ++checked;
        }
    }
    return {"gradient-check", worst <= tol,
            fmt("%.0f points, max relative error %.3g", static_cast<double>(checked), worst)};
}

std::vector<std::string_view> suite_names() {
    return {"posterior-match", "count-invariance", "incremental-batch", "kl-concentration", "gradient-check"};
}

SuiteResult run_suite(std::string_view name, std::uint64_t seed) {
    if (name == "posterior-match") return verify_posterior_match(seed);
    if (name == "count-invariance") return verify_count_invariance(seed);
    if (name == "incremental-batch") return verify_incremental_batch(seed);
    if (name == "kl-concentration") return verify_kl_concentration(seed);
    if (name == "gradient-check") return verify_gradient_check(seed);
    throw std::invalid_argument("unknown verify suite '" + std::string(name) + "'");
}

}  // namespace ensamp
