#include <doctest.h>

#include "ensamp/linear_agents.hpp"
#include "ensamp/neural_agents.hpp"

using namespace ensamp;

namespace {

Vector normal_vector(int n, SeededRng& rng) {
    Vector v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

NetShape neuron_shape(std::size_t n, Activation act = Activation::leaky_relu) {
    return {Architecture::neuron, n, 0, act};
}

}  // namespace

TEST_CASE("models start at their anchors and stay there with zero learning rate") {
    SeededRng prior(1);
    SgdConfig sgd;
    sgd.learning_rate = 0.0;
    NeuralEnsemble ens(neuron_shape(3), 4, 1.0, 1.0, sgd, prior, 9);
    CHECK(ens.models() == ens.anchors());
    SeededRng rng(2);
    ens.update(Vector{{1.0, 0.0, 1.0}}, 2.0, rng);
    CHECK(ens.models() == ens.anchors());
}

TEST_CASE("one full-batch step is one gradient step") {
    SeededRng prior(3);
    SgdConfig sgd;
    sgd.learning_rate = 0.05;
    sgd.steps = 1;
    sgd.mode = MinibatchMode::full;
    NeuralEnsemble ens(neuron_shape(2), 1, 2.0, 0.5, sgd, prior, 4);
    const MlpParams before = ens.models()[0];
    const Vector a{{0.3, 1.0}};
    const std::vector<double> w{0.25};
    ens.update(a, 1.0, w);
    const std::vector<TrainingSample> batch{{a, 1.25}};
    MlpParams expected = before;
    expected.axpy(-0.05, loss_and_gradient(before, ens.anchors()[0], batch, 2.0, 0.5).grad);
    CHECK(ens.models()[0] == expected);
}

TEST_CASE("perturbed targets persist across later updates") {
    SeededRng prior(5);
    NeuralEnsemble ens(neuron_shape(2), 3, 1.0, 1.0, SgdConfig{}, prior, 6);
    SeededRng rng(7);
    ens.update(Vector{{1.0, 1.0}}, 0.5, std::vector<double>{0.1, 0.2, 0.3});
    const double t01 = ens.replay_target(0, 1);
    for (int i = 0; i < 5; ++i) ens.update(normal_vector(2, rng), rng.normal(), rng);
    CHECK(ens.replay_size() == 6);
    CHECK(ens.replay_target(0, 1) == t01);
    CHECK(t01 == 0.5 + 0.2);
}

TEST_CASE("identity activation with converged SGD reproduces batch_fit") {
    SeededRng prior(8);
    SgdConfig sgd;
    sgd.learning_rate = 0.02;
    sgd.steps = 400;
    sgd.mode = MinibatchMode::full;
    const double prior_var = 2.0;
    const double noise_var = 4.0;
    NeuralEnsemble ens(neuron_shape(3, Activation::identity), 1, prior_var, noise_var, sgd, prior, 1);
    SeededRng rng(9);
    std::vector<BatchObservation> history;
    for (int t = 0; t < 12; ++t) {
        const Vector a = normal_vector(3, rng);
        const double r = rng.normal();
        const double w = 2.0 * rng.normal();
        ens.update(a, r, std::vector<double>{w});
        history.push_back({a, r, w});
    }
    const Vector anchor = ens.anchors()[0].w1.row(0).transpose();
    const Vector expected = batch_fit(anchor, history, SpdMatrix::scaled_identity(3, prior_var), noise_var);
    const Vector got = ens.models()[0].w1.row(0).transpose();
    CHECK((got - expected).norm() < 1e-3);
}

TEST_CASE("neural ensemble is reproducible") {
    auto run = [] {
        SeededRng prior(10);
        NeuralEnsemble ens({Architecture::two_layer, 3, 4, Activation::leaky_relu}, 3, 1.0, 100.0, SgdConfig{}, prior,
                           11);
        SeededRng rng(12);
        for (int t = 0; t < 20; ++t) ens.update(normal_vector(3, rng), 10.0 * rng.normal(), rng);
        return ens.models();
    };
    const auto first = run();
    for (const auto& m : first) CHECK(m.all_finite());
    CHECK(first == run());
}

TEST_CASE("epsilon schedules") {
    CHECK(EpsilonSchedule::fixed(0.2).at(100) == 0.2);
    CHECK(EpsilonSchedule::annealing(10).at(0) == 1.0);
    CHECK(EpsilonSchedule::annealing(10).at(19) == doctest::Approx(0.5));
    CHECK_THROWS(validate(EpsilonSchedule::fixed(1.5)));
    CHECK_THROWS(validate(EpsilonSchedule::annealing(-1.0)));
}

TEST_CASE("epsilon-greedy selection") {
    SeededRng prior(13);
    const ActionSet actions = ActionSet::standard_basis(4);
    const EpsilonGreedyAgent explore(neuron_shape(4), 1.0, 1.0, SgdConfig{}, EpsilonSchedule::fixed(1.0), prior, 1);
    SeededRng rng(14);
    const int draws = 10000;
    std::vector<int> counts(4, 0);
    for (int i = 0; i < draws; ++i) ++counts[explore.select(actions, 0, rng)];
    for (int c : counts) CHECK(std::abs(c / double(draws) - 0.25) <= 3.0 * std::sqrt(0.25 * 0.75 / draws));

    const EpsilonGreedyAgent greedy(neuron_shape(4), 1.0, 1.0, SgdConfig{}, EpsilonSchedule::fixed(0.0), prior, 1);
    const std::size_t best = argmax_lowest(forward_all(greedy.net(), actions, Activation::leaky_relu));
    for (int i = 0; i < 100; ++i) CHECK(eps_select(greedy, actions, 5, rng) == best);
}

TEST_CASE("dropout agent") {
    const NetShape shape{Architecture::two_layer, 3, 6, Activation::leaky_relu};
    SeededRng prior(15);
    CHECK_THROWS(DropoutAgent(neuron_shape(3), 1.0, 1.0, SgdConfig{}, 0.5, prior, 1, 2));
    CHECK_THROWS(DropoutAgent(shape, 1.0, 1.0, SgdConfig{}, 1.0, prior, 1, 2));

    const DropoutAgent half(shape, 1.0, 1.0, SgdConfig{}, 0.5, prior, 1, 2);
    SeededRng rng(16);
    double total = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const Vector m = half.sample_mask(rng);
        for (double x : m) CHECK((x == 0.0 || x == 1.0));
        total += m.sum();
    }
    CHECK(std::abs(total / (2000 * 6) - 0.5) < 0.03);

    SeededRng prior0(17);
    DropoutAgent none(shape, 1.0, 100.0, SgdConfig{}, 0.0, prior0, 1, 2);
    SeededRng data(18);
    for (int t = 0; t < 10; ++t) none.update(normal_vector(3, data), 10.0 * data.normal());
    SeededRng sel(19);
    const ActionSet actions(Matrix::Random(8, 3));
    CHECK(dropout_select(none, actions, sel) ==
          argmax_lowest(forward_all(none.net(), actions, Activation::leaky_relu)));

    CHECK(default_dropout_learning_rate(0.25) == 1e-2);
    CHECK(default_dropout_learning_rate(0.9) == 5e-2);
    CHECK_FALSE(default_dropout_learning_rate(0.3).has_value());
}

TEST_CASE("SGD configuration is validated") {
    SgdConfig sgd;
    sgd.minibatch = 0;
    CHECK_THROWS(validate(sgd));
    sgd = SgdConfig{};
    sgd.learning_rate = -1.0;
    CHECK_THROWS(validate(sgd));
    CHECK(parse_minibatch_mode("full") == MinibatchMode::full);
}

TEST_CASE("diverging SGD is reported") {
    SeededRng prior(20);
    SgdConfig sgd;
    sgd.learning_rate = 10.0;
    sgd.steps = 500;
    NeuralEnsemble ens(neuron_shape(2, Activation::identity), 1, 1.0, 1e-3, sgd, prior, 1);
    CHECK_THROWS_AS(ens.update(Vector{{5.0, 5.0}}, 100.0, std::vector<double>{0.0}), std::runtime_error);
}

TEST_CASE("normalized scaling divides the objective by the replay size") {
    SgdConfig sgd;
    sgd.learning_rate = 0.05;
    sgd.steps = 1;
    sgd.mode = MinibatchMode::full;
    sgd.scaling = LossScaling::normalized;
    SeededRng prior(21);
    NeuralEnsemble ens(neuron_shape(2), 1, 2.0, 0.5, sgd, prior, 4);
    ens.update(Vector{{0.3, 1.0}}, 1.0, std::vector<double>{0.0});
    const MlpParams before = ens.models()[0];
    ens.update(Vector{{-0.7, 1.0}}, 2.0, std::vector<double>{0.5});
    // n = 2 and the full batch has 2 samples: prior_var * 2, noise_var * 2.
    const std::vector<TrainingSample> batch{{Vector{{0.3, 1.0}}, 1.0}, {Vector{{-0.7, 1.0}}, 2.5}};
    MlpParams expected = before;
    expected.axpy(-0.05, loss_and_gradient(before, ens.anchors()[0], batch, 4.0, 1.0).grad);
    CHECK(ens.models()[0] == expected);
    CHECK(parse_loss_scaling("normalized") == LossScaling::normalized);
    CHECK_THROWS(parse_loss_scaling("mean"));
}
