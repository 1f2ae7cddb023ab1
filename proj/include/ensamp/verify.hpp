#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ensamp {

// Outcome of one property suite. detail is a one-line human summary of the
// worst observed discrepancy.
struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Incremental ensemble updates against the closed-form batch fit on random
// linear histories (N <= 10, T <= 50, general SPD prior), relative error 1e-8.
SuiteResult verify_incremental_batch(std::uint64_t seed, std::size_t histories = 100, double tol = 1e-8);

// M ensemble members after a fixed action sequence are i.i.d. N(mu_t, Sigma_t):
// per-component mean within 4 sqrt(Sigma_ii / M) and covariance within 10%
// relative Frobenius error.
SuiteResult verify_posterior_match(std::uint64_t seed, std::size_t dim = 5, std::size_t models = 10000,
                                   std::size_t steps = 20);

// Coupled noise: two action orders with equal counts give bit-identical
// beliefs, ensembles, exact optimal-action distribution and ensemble
// distribution.
SuiteResult verify_count_invariance(std::uint64_t seed);

// Mean KL(p_hat || p) over redraws on a 5-arm instance after 50 observations
// decreases across the ensemble sizes and ends below kl_limit.
struct KlConcentrationPoint {
    std::size_t models;
    double mean_kl;
    double stderr_kl;
};
SuiteResult verify_kl_concentration(std::uint64_t seed, std::size_t redraws = 200,
                                    std::vector<std::size_t> sizes = {10, 100, 1000, 10000}, double kl_limit = 0.01,
                                    std::vector<KlConcentrationPoint>* points = nullptr);

// Analytic anchored-loss gradients against central differences (h = 1e-5)
// at random points away from activation kinks, both architectures.
SuiteResult verify_gradient_check(std::uint64_t seed, std::size_t points = 20, double tol = 1e-4);

std::vector<std::string_view> suite_names();

// Runs a suite by its CLI name; throws std::invalid_argument for unknown names.
SuiteResult run_suite(std::string_view name, std::uint64_t seed);

}  // namespace ensamp
