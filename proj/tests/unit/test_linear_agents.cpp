#include <doctest.h>

#include <algorithm>

#include "ensamp/linear_agents.hpp"
#include "ensamp/stats.hpp"

using namespace ensamp;

namespace {

Vector normal_vector(int n, SeededRng& rng) {
    Vector v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

// Conjugate posterior from the whole history by explicit inversion.
std::pair<Vector, Matrix> batch_posterior(const Vector& mu0, const Matrix& sigma0, const std::vector<Vector>& xs,
                                          const std::vector<double>& ys, double noise_var) {
    const Matrix p0 = sigma0.inverse();
    Matrix precision = p0;
    Vector rhs = p0 * mu0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        precision += xs[i] * xs[i].transpose() / noise_var;
        rhs += xs[i] * ys[i] / noise_var;
    }
    const Matrix cov = precision.inverse();
    return {cov * rhs, cov};
}

}  // namespace

TEST_CASE("ActionDistribution validates the simplex") {
    CHECK_THROWS(ActionDistribution({0.5, 0.6}));
    CHECK_THROWS(ActionDistribution({-0.1, 1.1}));
    CHECK_THROWS(ActionDistribution(std::vector<double>{}));
    const std::vector<std::size_t> counts{2, 1, 1};
    CHECK(ActionDistribution::from_counts(counts).probs() == std::vector<double>{0.5, 0.25, 0.25});
}

TEST_CASE("ts_update one-step example and uninformative action") {
    const GaussianBelief prior(Vector::Zero(2), SpdMatrix::identity(2), 1.0);
    const GaussianBelief post = ts_update(prior, Vector{{1.0, 0.0}}, 1.0);
    CHECK(post.mean()[0] == doctest::Approx(0.5));
    CHECK(post.mean()[1] == 0.0);
    CHECK(post.cov()(0, 0) == doctest::Approx(0.5));
    CHECK(post.cov()(1, 1) == 1.0);
    CHECK(ts_update(post, Vector::Zero(2), 3.0) == post);
}

TEST_CASE("ts_update chain matches the batch posterior") {
    SeededRng rng(11);
    const int n = 4;
    const Vector mu0 = normal_vector(n, rng);
    Matrix s = Matrix::Identity(n, n) * 2.0;
    s(0, 1) = s(1, 0) = 0.5;
    GaussianBelief belief(mu0, SpdMatrix(s), 0.8);
    std::vector<Vector> xs;
    std::vector<double> ys;
    for (int t = 0; t < 20; ++t) {
        xs.push_back(normal_vector(n, rng));
        ys.push_back(rng.normal());
        belief.update(xs.back(), ys.back());
    }
    const auto [mean, cov] = batch_posterior(mu0, s, xs, ys, 0.8);
    CHECK((belief.mean() - mean).norm() <= 1e-8 * mean.norm());
    CHECK((belief.cov().matrix() - cov).norm() <= 1e-8 * cov.norm());
}

TEST_CASE("ts_select: collapsed and symmetric posteriors") {
    SeededRng rng(4);
    const ActionSet basis = ActionSet::standard_basis(2);
    const GaussianBelief collapsed(Vector{{1.0, 0.0}}, SpdMatrix::scaled_identity(2, 1e-12), 1.0);
    for (int i = 0; i < 100; ++i) CHECK(ts_select(collapsed, basis, rng) == 0);

    const GaussianBelief symmetric(Vector::Zero(2), SpdMatrix::identity(2), 1.0);
    int first = 0;
    for (int i = 0; i < 10000; ++i) first += ts_select(symmetric, basis, rng) == 0;
    CHECK(std::abs(first / 10000.0 - 0.5) < 0.02);
}

TEST_CASE("ts_select frequencies match the exact optimal-action distribution") {
    SeededRng rng(5);
    const Vector means{{0.1, 0.4, -0.2, 0.3}};
    Matrix cov = Matrix::Zero(4, 4);
    cov.diagonal() = Vector{{0.5, 0.2, 1.0, 0.3}};
    const GaussianBelief belief(means, SpdMatrix(cov), 1.0);
    const ActionDistribution p = exact_p_independent(belief);
    const ActionSet basis = ActionSet::standard_basis(4);
    const int draws = 40000;
    std::vector<int> counts(4, 0);
    for (int i = 0; i < draws; ++i) ++counts[ts_select(belief, basis, rng)];
    for (std::size_t a = 0; a < 4; ++a) {
        const double band = 3.0 * std::sqrt(p[a] * (1.0 - p[a]) / draws);
        CHECK(std::abs(counts[a] / static_cast<double>(draws) - p[a]) <= band);
    }
}

TEST_CASE("es_init draws i.i.d. prior samples deterministically") {
    SeededRng a(6), b(6);
    const LinearEnsemble one = es_init(Vector::Zero(2), SpdMatrix::identity(2), 1.0, 1, a);
    CHECK(one.size() == 1);
    CHECK(es_init(Vector::Zero(2), SpdMatrix::identity(2), 1.0, 3, b) ==
          es_init(Vector::Zero(2), SpdMatrix::identity(2), 1.0, 3, a = SeededRng(6)));

    SeededRng rng(7);
    const std::size_t m = 10000;
    const LinearEnsemble big = es_init(Vector::Zero(2), SpdMatrix::identity(2), 1.0, m, rng);
    const Vector mean = big.models().rowwise().mean();
    CHECK(std::abs(mean[0]) < 4.0 / std::sqrt(m));
    CHECK(std::abs(mean[1]) < 4.0 / std::sqrt(m));
    CHECK_THROWS(es_init(Vector::Zero(2), SpdMatrix::identity(2), 1.0, 0, rng));
}

TEST_CASE("es_update examples") {
    SeededRng rng(8);
    const LinearEnsemble ens = LinearEnsemble::init(Vector::Zero(2), SpdMatrix::identity(2), 1.0, 1, rng);
    const Vector before = ens.model(0);
    const std::vector<double> w0{0.0};
    // With Sigma_0 = I, sigma^2 = 1, a = e1, r = 1 the recursion moves
    // coordinate 0 halfway to r and leaves coordinate 1 alone; from a zero
    // anchor that is (0.5, 0).
    const LinearEnsemble stepped = es_update(ens, Vector{{1.0, 0.0}}, 1.0, w0);
    CHECK(stepped.model(0)[0] == doctest::Approx(before[0] + 0.5 * (1.0 - before[0])));
    CHECK(stepped.model(0)[1] == before[1]);
    CHECK(es_update(stepped, Vector::Zero(2), 5.0, w0) == stepped);
    CHECK_THROWS(es_update(stepped, Vector::Zero(2), 5.0, std::vector<double>{0.0, 1.0}));
}

TEST_CASE("batch_fit closed form") {
    const Vector anchor{{0.3, -0.2}};
    CHECK(batch_fit(anchor, {}, SpdMatrix::identity(2), 1.0) == anchor);
    const std::vector<BatchObservation> one{{Vector{{1.0, 0.0}}, 0.75, 0.25}};
    const Vector fit = batch_fit(Vector::Zero(2), one, SpdMatrix::identity(2), 1.0);
    CHECK(fit[0] == doctest::Approx(0.5));
    CHECK(fit[1] == doctest::Approx(0.0));
}

TEST_CASE("incremental models equal batch fits over random histories") {
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        SeededRng rng(100 + trial);
        const int n = 1 + static_cast<int>(rng.index(6));
        const std::size_t models = 1 + rng.index(4);
        const double noise_var = rng.uniform(0.3, 2.0);
        LinearEnsemble ens = LinearEnsemble::init(Vector::Zero(n), SpdMatrix::scaled_identity(n, 1.5), noise_var,
                                                  models, rng, true);
        for (int t = 0; t < 15; ++t) {
            std::vector<double> w(models);
            for (auto& x : w) x = std::sqrt(noise_var) * rng.normal();
            ens = es_update(ens, normal_vector(n, rng), rng.normal(), w);
        }
        for (std::size_t m = 0; m < models; ++m) {
            const Vector batch = batch_fit(ens.anchors().col(static_cast<Eigen::Index>(m)), model_history(ens, m),
                                           ens.prior_cov(), noise_var);
            CHECK((ens.model(m) - batch).norm() <= 1e-8 * batch.norm());
        }
    }
}

TEST_CASE("ensemble covariance equals the belief covariance") {
    SeededRng rng(12);
    GaussianBelief belief(Vector::Zero(3), SpdMatrix::identity(3), 1.0);
    LinearEnsemble ens = LinearEnsemble::init(Vector::Zero(3), SpdMatrix::identity(3), 1.0, 4, rng);
    for (int t = 0; t < 10; ++t) {
        const Vector a = normal_vector(3, rng);
        const double r = rng.normal();
        belief.update(a, r);
        ens.update(a, r, std::vector<double>(4, 0.0));
    }
    CHECK(ens.cov().matrix() == belief.cov().matrix());
}

TEST_CASE("ensemble_action_dist counts argmaxes") {
    // Models are the columns; their argmaxes over the basis are 0, 0, 1, 2.
    SeededRng rng(0);
    LinearEnsemble ens = LinearEnsemble::init(Vector::Zero(3), SpdMatrix::identity(3), 1e-12, 4, rng);
    const Matrix target{{1.0, 2.0, 0.0, 0.0}, {0.0, 1.0, 3.0, 0.0}, {0.0, 0.0, 1.0, 5.0}};
    // Near-noiseless observations pin each model to its target column.
    for (int i = 0; i < 3; ++i) {
        Vector a = Vector::Zero(3);
        a[i] = 1.0;
        std::vector<double> w(4);
        for (int m = 0; m < 4; ++m) w[m] = target(i, m);
        ens.update(a, 0.0, w);
    }
    const ActionDistribution p = ensemble_action_dist(ens, ActionSet::standard_basis(3));
    CHECK(p.probs() == std::vector<double>{0.5, 0.25, 0.25});
}

TEST_CASE("es_select frequencies match ensemble_action_dist") {
    SeededRng rng(13);
    const ActionSet actions = ActionSet::standard_basis(4);
    const LinearEnsemble ens = LinearEnsemble::init(Vector::Zero(4), SpdMatrix::identity(4), 1.0, 7, rng);
    const ActionDistribution p = ensemble_action_dist(ens, actions);
    const int draws = 100000;
    std::vector<int> counts(4, 0);
    for (int i = 0; i < draws; ++i) ++counts[es_select(ens, actions, rng)];
    for (std::size_t a = 0; a < 4; ++a) {
        const double band = 3.0 * std::sqrt(p[a] * (1.0 - p[a]) / draws) + 1e-12;
        CHECK(std::abs(counts[a] / static_cast<double>(draws) - p[a]) <= band);
    }
    SeededRng single(1);
    const LinearEnsemble lone = LinearEnsemble::init(Vector::Zero(4), SpdMatrix::identity(4), 1.0, 1, single);
    CHECK(es_select(lone, actions, rng) == argmax_lowest(lone.model(0)));
}

TEST_CASE("count ordering with general linear actions agrees to rounding") {
    SeededRng rng(21);
    const int n = 3;
    const ActionSet actions = make_action_set(4, n, rng);
    const NoiseTable noise(NoiseMode::coupled, 77);
    const LinearBanditEnv env(normal_vector(n, rng), actions, 1.0, Vector::Zero(n), SpdMatrix::identity(n));
    std::vector<std::size_t> order{0, 0, 1, 2, 2, 2, 3, 1};
    auto replay = [&](const std::vector<std::size_t>& seq) {
        GaussianBelief belief(Vector::Zero(n), SpdMatrix::identity(n), 1.0);
        SeededRng prior(3);
        LinearEnsemble ens = LinearEnsemble::init(Vector::Zero(n), SpdMatrix::identity(n), 1.0, 5, prior);
        ActionCounts counts(4, 0);
        SeededRng unused(0);
        for (std::size_t a : seq) {
            const std::size_t c = counts[a];
            const double r = step(env, a, counts, noise, unused);
            std::vector<double> w(5);
            for (std::size_t m = 0; m < 5; ++m) w[m] = noise.perturbation(c, a, m, unused);
            belief.update(actions.action(a), r);
            ens.update(actions.action(a), r, w);
        }
        return std::pair{belief, ens};
    };
    const auto [b1, e1] = replay(order);
    std::reverse(order.begin(), order.end());
    const auto [b2, e2] = replay(order);
    CHECK((b1.mean() - b2.mean()).norm() <= 1e-12 * b1.mean().norm());
    CHECK((e1.models() - e2.models()).norm() <= 1e-12 * e1.models().norm());
}
