#include <doctest.h>

#include "ensamp/environments.hpp"

using namespace ensamp;

TEST_CASE("make_action_set draws the documented layout") {
    SeededRng rng(1);
    const ActionSet actions = make_action_set(30, 4, rng);
    CHECK(actions.count() == 30);
    CHECK(actions.dim() == 4);
    for (std::size_t k = 0; k < actions.count(); ++k) {
        const Vector a = actions.action(k);
        CHECK(a[3] == 1.0);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(a[i]) <= 1.0);
    }
    CHECK_THROWS(actions.action(30));
}

TEST_CASE("argmax_lowest breaks ties toward the first index") {
    CHECK(argmax_lowest(Vector{{1.0, 3.0, 3.0, 2.0}}) == 1);
    CHECK(argmax_lowest(Vector{{0.0, 0.0}}) == 0);
}

TEST_CASE("mean rewards per family") {
    const IndependentGaussianEnv gauss(Vector{{0.2, -1.0, 0.7}}, 1.0);
    CHECK(gauss.true_mean(2) == 0.7);
    CHECK(gauss.optimal().index == 2);
    CHECK(gauss.gap() == doctest::Approx(1.7));
    CHECK_THROWS_AS(gauss.true_mean(3), std::out_of_range);

    const ActionSet actions(Matrix{{1.0, 0.0}, {0.0, 1.0}, {-1.0, 1.0}});
    const NeuronEnv neuron(Vector{{1.0, -1.0}}, actions, 1.0, 1.0);
    CHECK(neuron.true_mean(0) == 1.0);
    CHECK(neuron.true_mean(1) == 0.0);
    CHECK(neuron.true_mean(2) == 0.0);

    const TwoLayerNetEnv net(Matrix{{1.0, 0.0}}, Vector{{2.0}}, ActionSet(Matrix{{3.0, 0.0}, {-3.0, 0.0}}), 1.0, 1.0);
    CHECK(net.true_mean(0) == 6.0);
    CHECK(net.true_mean(1) == 0.0);

    const LinearBanditEnv linear(Vector{{1.0, 2.0}}, actions, 1.0, Vector::Zero(2), SpdMatrix::identity(2));
    CHECK(linear.true_mean(2) == 1.0);
    CHECK(linear.optimal().index == 1);
}

TEST_CASE("sample_env_from_prior is deterministic and shaped") {
    EnvSpec spec;
    spec.family = EnvFamily::two_layer;
    spec.num_actions = 7;
    spec.dim = 3;
    spec.hidden = 4;
    SeededRng a(9), b(9);
    const auto x = sample_env_from_prior(spec, a);
    const auto y = sample_env_from_prior(spec, b);
    CHECK(x->num_actions() == 7);
    CHECK(x->actions().dim() == 3);
    CHECK(x->true_means() == y->true_means());

    spec.family = EnvFamily::independent_gaussian;
    spec.hidden = 0;
    spec.dim = 0;
    const auto g = sample_env_from_prior(spec, a);
    CHECK(g->actions().matrix() == Matrix::Identity(7, 7));

    spec.noise_var = 0.0;
    CHECK_THROWS(validate(spec));
}

TEST_CASE("coupled noise depends only on pull index and action") {
    const NoiseTable table(NoiseMode::coupled, 42);
    SeededRng r1(1), r2(2);
    CHECK(table.reward(3, 1, r1) == table.reward(3, 1, r2));
    CHECK(table.reward(3, 1, r1) != table.reward(4, 1, r1));
    CHECK(table.perturbation(0, 2, 5, r1) == table.perturbation(0, 2, 5, r2));
    CHECK(table.perturbation(0, 2, 5, r1) != table.perturbation(0, 2, 6, r1));
    CHECK(r1.counter() == 0);

    const NoiseTable fresh(NoiseMode::fresh, 42);
    SeededRng s1(7), s2(7);
    CHECK(fresh.reward(0, 0, s1) == fresh.reward(0, 0, s2));
    CHECK(s1.counter() > 0);
}

TEST_CASE("step adds scaled noise and counts pulls") {
    const IndependentGaussianEnv env(Vector{{1.0, 2.0}}, 4.0);
    const NoiseTable table(NoiseMode::coupled, 5);
    ActionCounts counts(2, 0);
    SeededRng rng(0);
    const double z0 = table.reward(0, 1, rng);
    const double z1 = table.reward(1, 1, rng);
    CHECK(step(env, 1, counts, table, rng) == 2.0 + 2.0 * z0);
    CHECK(step(env, 1, counts, table, rng) == 2.0 + 2.0 * z1);
    CHECK(counts == ActionCounts{0, 2});
}

TEST_CASE("family and noise mode names round-trip") {
    for (auto f : {EnvFamily::independent_gaussian, EnvFamily::linear, EnvFamily::neuron, EnvFamily::two_layer}) {
        CHECK(parse_env_family(to_string(f)) == f);
    }
    CHECK(parse_noise_mode("coupled") == NoiseMode::coupled);
    CHECK_THROWS(parse_noise_mode("other"));
}
