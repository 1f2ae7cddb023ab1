#include "ensamp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ensamp {

double normal_pdf(double x) noexcept { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

struct SimpsonPanel {
    double lo, mid, hi;
    double f_lo, f_mid, f_hi;
    double whole;
};

double simpson(double lo, double hi, double f_lo, double f_mid, double f_hi) {
    return (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
}

double refine(const std::function<double(double)>& f, const SimpsonPanel& p, double tol, int depth) {
    const double lm = 0.5 * (p.lo + p.mid);
    const double rm = 0.5 * (p.mid + p.hi);
    const double f_lm = f(lm);
    const double f_rm = f(rm);
    const double left = simpson(p.lo, p.mid, p.f_lo, f_lm, p.f_mid);
    const double right = simpson(p.mid, p.hi, p.f_mid, f_rm, p.f_hi);
    const double delta = left + right - p.whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return refine(f, {p.lo, lm, p.mid, p.f_lo, f_lm, p.f_mid, left}, 0.5 * tol, depth - 1) +
           refine(f, {p.mid, rm, p.hi, p.f_mid, f_rm, p.f_hi, right}, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi, double tol, int max_depth) {
    if (!(hi > lo)) return 0.0;
    // Start from 8 panels so that narrow features are not missed by the first estimate.
    constexpr int kPanels = 8;
    const double width = (hi - lo) / kPanels;
    double total = 0.0;
    for (int i = 0; i < kPanels; ++i) {
        const double a = lo + width * i;
        const double b = (i + 1 == kPanels) ? hi : a + width;
        const double m = 0.5 * (a + b);
        const double fa = f(a), fm = f(m), fb = f(b);
        total += refine(f, {a, m, b, fa, fm, fb, simpson(a, b, fa, fm, fb)}, tol / kPanels, max_depth);
    }
    return total;
}

ActionDistribution exact_p_independent(std::span<const double> means, std::span<const double> variances) {
    if (means.empty() || means.size() != variances.size()) {
        throw std::invalid_argument("exact_p_independent: means and variances must be nonempty and equal length");
    }
    std::vector<double> sd(means.size());
    for (std::size_t k = 0; k < means.size(); ++k) {
        if (!(variances[k] > 0.0)) throw std::invalid_argument("exact_p_independent: variances must be positive");
        sd[k] = std::sqrt(variances[k]);
    }
    // Substituting x = mu_k + sd_k z puts arm k's density on z in [-8, 8].
    constexpr double kTail = 8.0;
    std::vector<double> probs(means.size());
    double total = 0.0;
    for (std::size_t k = 0; k < means.size(); ++k) {
        auto integrand = [&](double z) {
            const double x = means[k] + sd[k] * z;
            double v = normal_pdf(z);
            for (std::size_t j = 0; j < means.size() && v > 0.0; ++j) {
                if (j != k) v *= normal_cdf((x - means[j]) / sd[j]);
            }
            return v;
        };
        probs[k] = std::max(0.0, adaptive_simpson(integrand, -kTail, kTail, 1e-10));
        total += probs[k];
    }
    if (std::abs(total - 1.0) > 1e-6) {
        throw std::runtime_error("exact_p_independent: quadrature mass deviates from 1 by more than 1e-6");
    }
    for (auto& p : probs) p /= total;
    // Absorb the last rounding error so the result lies on the simplex to 1e-12.
    double sum = 0.0;
    for (double p : probs) sum += p;
    probs[static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin())] += 1.0 - sum;
    return ActionDistribution(std::move(probs));
}

ActionDistribution exact_p_independent(const GaussianBelief& belief) {
    const std::size_t n = belief.dim();
    std::vector<double> means(n), vars(n);
    for (std::size_t i = 0; i < n; ++i) {
        means[i] = belief.mean()[static_cast<Eigen::Index>(i)];
        vars[i] = belief.cov()(i, i);
    }
    return exact_p_independent(means, vars);
}

ActionDistribution monte_carlo_p(const GaussianBelief& belief, const ActionSet& actions, std::size_t samples,
                                 SeededRng& rng) {
    if (samples < 1) throw std::invalid_argument("monte_carlo_p: samples must be >= 1");
    if (actions.dim() != belief.dim()) throw std::invalid_argument("monte_carlo_p: dimension mismatch");
    const GaussianSampler posterior(belief.mean(), belief.cov());
    std::vector<std::size_t> counts(actions.count(), 0);
    for (std::size_t s = 0; s < samples; ++s) ++counts[argmax_lowest(actions.matrix() * posterior(rng))];
    return ActionDistribution::from_counts(counts);
}

double kl_divergence(const ActionDistribution& p_hat, const ActionDistribution& p) {
    if (p_hat.size() != p.size()) throw std::invalid_argument("kl_divergence: length mismatch");
    double kl = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        const double q = p_hat[a];
        if (q == 0.0) continue;
        if (p[a] == 0.0) return std::numeric_limits<double>::infinity();
        kl += q * std::log(q / p[a]);
    }
    return std::max(kl, 0.0);
}

double tv_distance(const ActionDistribution& p_hat, const ActionDistribution& p) {
    if (p_hat.size() != p.size()) throw std::invalid_argument("tv_distance: length mismatch");
    double tv = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) tv += std::abs(p_hat[a] - p[a]);
    return tv;
}

std::uint64_t theorem1_min_models(std::uint64_t num_actions, std::uint64_t horizon, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("theorem1_min_models: eps must be positive");
    if (num_actions < 1) throw std::invalid_argument("theorem1_min_models: need at least one action");
    if (horizon < 1) throw std::invalid_argument("theorem1_min_models: horizon must be >= 1");
    const long double a = static_cast<long double>(num_actions);
    const long double e = static_cast<long double>(eps);
    const long double t = static_cast<long double>(horizon);
    const long double bound = (4.0L * a / (e * e)) * std::log(4.0L * a * t / (e * e * e));
    const long double m = std::ceil(bound);
    if (m >= 9.2e18L) throw std::overflow_error("theorem1_min_models: result exceeds 64-bit range");
    return m < 1.0L ? 1 : static_cast<std::uint64_t>(m);
}

bool theorem1_assumption_holds(std::uint64_t num_actions, std::uint64_t horizon, double eps) {
    const double delta = eps / 2.0;
    return static_cast<double>(num_actions) * static_cast<double>(horizon) / (eps * delta) >= 9.0;
}

double concentration_bound(std::uint64_t num_actions, std::uint64_t num_models, double eps, std::uint64_t t) {
    const double a = static_cast<double>(num_actions);
    const double m = static_cast<double>(num_models);
    const double log_bound = a * std::log1p(static_cast<double>(t)) + a * std::log1p(m) - m * eps;
    if (std::isnan(log_bound)) throw std::invalid_argument("concentration_bound: invalid arguments");
    return std::clamp(std::exp(std::min(log_bound, 0.0)), 0.0, 1.0);
}

MeanStderr mean_stderr(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean_stderr: empty sample");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

RegretSummary aggregate_regret(std::span<const std::vector<double>> traces) {
    if (traces.empty()) throw std::invalid_argument("aggregate_regret: no traces");
    const std::size_t horizon = traces.front().size();
    for (const auto& tr : traces) {
        if (tr.size() != horizon) throw std::invalid_argument("aggregate_regret: traces differ in length");
    }
    RegretSummary out;
    out.realizations = traces.size();
    out.per_period_mean.resize(horizon);
    out.per_period_stderr.resize(horizon);
    std::vector<double> column(traces.size());
    for (std::size_t t = 0; t < horizon; ++t) {
        for (std::size_t r = 0; r < traces.size(); ++r) column[r] = traces[r][t];
        const MeanStderr ms = mean_stderr(column);
        out.per_period_mean[t] = ms.mean;
        out.per_period_stderr[t] = ms.stderr;
    }
    for (double m : out.per_period_mean) out.cumulative_mean += m;
    std::vector<double> totals(traces.size(), 0.0);
    for (std::size_t r = 0; r < traces.size(); ++r) {
        for (double v : traces[r]) totals[r] += v;
    }
    out.cumulative_stderr = mean_stderr(totals).stderr;
    return out;
}

}  // namespace ensamp
