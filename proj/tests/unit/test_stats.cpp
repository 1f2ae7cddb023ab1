#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "ensamp/stats.hpp"

using namespace ensamp;

namespace {

std::uint64_t bound_oracle(std::uint64_t actions, std::uint64_t horizon, double eps) {
    using big = boost::multiprecision::cpp_bin_float_50;
    const big a(actions), t(horizon), e(eps);
    const big value = 4 * a / (e * e) * log(4 * a * t / (e * e * e));
    return static_cast<std::uint64_t>(ceil(value));
}

}  // namespace

TEST_CASE("normal cdf reference values") {
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_cdf(1.0 / std::numbers::sqrt2) == doctest::Approx(0.76025).epsilon(1e-5));
    CHECK(normal_cdf(-40.0) >= 0.0);
}

TEST_CASE("adaptive_simpson integrates smooth functions") {
    CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-12) ==
          doctest::Approx(2.0).epsilon(1e-10));
    CHECK(adaptive_simpson([](double x) { return normal_pdf(x); }, -8.0, 8.0, 1e-12) ==
          doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("exact_p for two arms is a normal cdf of the standardized gap") {
    const std::vector<double> means{0.0, 1.0}, vars{1.0, 1.0};
    const ActionDistribution p = exact_p_independent(means, vars);
    CHECK(p[1] == doctest::Approx(normal_cdf(1.0 / std::numbers::sqrt2)).epsilon(1e-9));
    CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-12));

    SeededRng rng(1);
    const GaussianBelief belief(Vector{{0.0, 1.0}}, SpdMatrix::identity(2), 1.0);
    const ActionDistribution mc = monte_carlo_p(belief, ActionSet::standard_basis(2), 1000000, rng);
    CHECK(std::abs(mc[1] - p[1]) < 4.0 * std::sqrt(p[1] * p[0] / 1e6));
}

TEST_CASE("exact_p agrees with Monte Carlo on uneven arms") {
    const std::vector<double> means{0.3, -0.5, 0.1, 0.35, 2.0};
    const std::vector<double> vars{0.2, 2.0, 1.0, 0.01, 5.0};
    const ActionDistribution p = exact_p_independent(means, vars);
    Matrix cov = Matrix::Zero(5, 5);
    for (int i = 0; i < 5; ++i) cov(i, i) = vars[static_cast<std::size_t>(i)];
    const GaussianBelief belief(Vector::Map(means.data(), 5), SpdMatrix(cov), 1.0);
    SeededRng rng(2);
    const std::size_t n = 400000;
    const ActionDistribution mc = monte_carlo_p(belief, ActionSet::standard_basis(5), n, rng);
    for (std::size_t a = 0; a < 5; ++a) {
        CHECK(std::abs(mc[a] - p[a]) <= 4.0 * std::sqrt(p[a] * (1 - p[a]) / n) + 1e-9);
    }
}

TEST_CASE("exact_p symmetry and validation") {
    const ActionDistribution p = exact_p_independent(std::vector<double>{0.0, 0.0, 0.0}, std::vector<double>{1, 1, 1});
    for (std::size_t a = 0; a < 3; ++a) CHECK(p[a] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK_THROWS(exact_p_independent(std::vector<double>{0.0}, std::vector<double>{0.0}));
    CHECK_THROWS(exact_p_independent(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0}));
}

TEST_CASE("divergences") {
    const ActionDistribution q({0.75, 0.25}), u({0.5, 0.5});
    CHECK(kl_divergence(q, u) == doctest::Approx(0.130812).epsilon(1e-6));
    CHECK(kl_divergence(u, u) == 0.0);
    const ActionDistribution point({1.0, 0.0});
    CHECK(kl_divergence(u, point) == std::numeric_limits<double>::infinity());
    CHECK(kl_divergence(point, u) == doctest::Approx(std::log(2.0)));
    CHECK(tv_distance(q, u) == doctest::Approx(0.5));
    CHECK_THROWS(kl_divergence(q, ActionDistribution({1.0})));
}

TEST_CASE("ensemble size bound") {
    CHECK(theorem1_min_models(1, 1, 1.0) == 6);
    CHECK(theorem1_min_models(50, 2000, 0.03) == bound_oracle(50, 2000, 0.03));
    SeededRng rng(3);
    for (int i = 0; i < 50; ++i) {
        const std::uint64_t a = 1 + rng.index(1000);
        const std::uint64_t t = 1 + rng.index(100000);
        const double eps = rng.uniform(0.005, 1.0);
        CHECK(theorem1_min_models(a, t, eps) == bound_oracle(a, t, eps));
    }
    CHECK_THROWS(theorem1_min_models(5, 5, 0.0));
    CHECK_THROWS(theorem1_min_models(5, 5, -1.0));
    CHECK(theorem1_min_models(1, 1, 100.0) == 1);
    CHECK(theorem1_assumption_holds(50, 2000, 0.03));
    CHECK_FALSE(theorem1_assumption_holds(1, 1, 1.0));
}

TEST_CASE("concentration bound") {
    CHECK(concentration_bound(1, 1, std::log(4.0), 0) == doctest::Approx(0.5));
    CHECK(concentration_bound(10, 2, 0.1, 100) == 1.0);
    CHECK(concentration_bound(2, 100000, 1.0, 10) < 1e-100);
}

TEST_CASE("mean and standard error") {
    const std::vector<double> one{3.0};
    CHECK(mean_stderr(one).stderr == 0.0);
    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    const MeanStderr ms = mean_stderr(xs);
    CHECK(ms.mean == 2.5);
    CHECK(ms.stderr == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("aggregate_regret") {
    const std::vector<std::vector<double>> single{{0.5, 0.25, 0.0}};
    const RegretSummary s = aggregate_regret(single);
    CHECK(s.per_period_mean == single[0]);
    CHECK(s.cumulative_mean == 0.75);
    CHECK_FALSE(s.stderr_defined());
    for (double e : s.per_period_stderr) CHECK(e == 0.0);

    const std::vector<std::vector<double>> two{{1.0, 0.0}, {3.0, 2.0}};
    const RegretSummary t = aggregate_regret(two);
    CHECK(t.per_period_mean == std::vector<double>{2.0, 1.0});
    CHECK(t.per_period_stderr[0] == doctest::Approx(1.0));
    CHECK(t.cumulative_mean == 3.0);
    CHECK(t.cumulative_stderr == doctest::Approx(2.0));
    CHECK_THROWS(aggregate_regret(std::vector<std::vector<double>>{{1.0}, {1.0, 2.0}}));
}
