#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ensamp/environments.hpp"
#include "ensamp/linear_agents.hpp"
#include "ensamp/rng.hpp"

namespace ensamp {

double normal_pdf(double x) noexcept;
double normal_cdf(double x) noexcept;

// Adaptive Simpson quadrature of f on [lo, hi] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi, double tol,
                        int max_depth = 40);

// P(arm k has the largest draw) for independent arms N(means[k], variances[k]).
ActionDistribution exact_p_independent(std::span<const double> means, std::span<const double> variances);
ActionDistribution exact_p_independent(const GaussianBelief& diagonal_belief);

// Empirical frequency of argmax_a theta^T a over posterior draws of theta.
ActionDistribution monte_carlo_p(const GaussianBelief& belief, const ActionSet& actions, std::size_t samples,
                                 SeededRng& rng);

// sum p_hat log(p_hat / p), natural log, 0 log 0 = 0; +infinity when p_hat
// puts mass where p has none.
double kl_divergence(const ActionDistribution& p_hat, const ActionDistribution& p);

// L1 distance sum |p_hat - p|. The coupling bound uses half of this value.
double tv_distance(const ActionDistribution& p_hat, const ActionDistribution& p);

// Smallest integer M >= (4|A| / eps^2) log(4 |A| T / eps^3), at least 1.
std::uint64_t theorem1_min_models(std::uint64_t num_actions, std::uint64_t horizon, double eps);

// Whether |A| T / (eps * delta) >= 9 holds with delta = eps / 2.
bool theorem1_assumption_holds(std::uint64_t num_actions, std::uint64_t horizon, double eps);

// min(1, (t+1)^|A| (M+1)^|A| exp(-M eps)), evaluated in log space.
double concentration_bound(std::uint64_t num_actions, std::uint64_t num_models, double eps, std::uint64_t t);

struct RegretSummary {
    std::vector<double> per_period_mean;
    std::vector<double> per_period_stderr;
    double cumulative_mean = 0.0;
    double cumulative_stderr = 0.0;
    std::size_t realizations = 0;

    // stderr is reported as 0 when only one realization exists.
    bool stderr_defined() const noexcept { return realizations > 1; }
};

// Per-period mean and standard error (sample std / sqrt(n)) over equal-length traces.
RegretSummary aggregate_regret(std::span<const std::vector<double>> traces);

// Mean and standard error of a sample.
struct MeanStderr {
    double mean;
    double stderr;
};

MeanStderr mean_stderr(std::span<const double> values);

}  // namespace ensamp
