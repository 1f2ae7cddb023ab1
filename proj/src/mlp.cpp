#include "ensamp/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ensamp {

double activate(double x, Activation act) noexcept {
    switch (act) {
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::leaky_relu: return x > 0.0 ? x : kLeakySlope * x;
        case Activation::identity: return x;
    }
    return x;
}

double activate_slope(double x, Activation act) noexcept {
    switch (act) {
        case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
        case Activation::leaky_relu: return x > 0.0 ? 1.0 : kLeakySlope;
        case Activation::identity: return 1.0;
    }
    return 1.0;
}

MlpParams MlpParams::neuron(Vector theta) {
    MlpParams p;
    p.arch = Architecture::neuron;
    p.w1 = theta.transpose();
    return p;
}

MlpParams MlpParams::two_layer(Matrix w1, Vector w2) {
    if (w1.rows() != w2.size() || w1.rows() < 1) throw std::invalid_argument("MlpParams: w1 rows must equal w2 size");
    MlpParams p;
    p.arch = Architecture::two_layer;
    p.w1 = std::move(w1);
    p.w2 = std::move(w2);
    return p;
}

MlpParams MlpParams::zeros(Architecture arch, std::size_t input_dim, std::size_t hidden) {
    const auto n = static_cast<Eigen::Index>(input_dim);
    if (arch == Architecture::neuron) return neuron(Vector::Zero(n));
    const auto d = static_cast<Eigen::Index>(hidden);
    return two_layer(Matrix::Zero(d, n), Vector::Zero(d));
}

MlpParams MlpParams::sample_prior(Architecture arch, std::size_t input_dim, std::size_t hidden, double prior_var,
                                  SeededRng& rng) {
    if (!(prior_var > 0.0)) throw std::invalid_argument("MlpParams: prior_var must be positive");
    MlpParams p = zeros(arch, input_dim, hidden);
    const double sd = std::sqrt(prior_var);
    for (Eigen::Index j = 0; j < p.w1.cols(); ++j) {
        for (Eigen::Index i = 0; i < p.w1.rows(); ++i) p.w1(i, j) = sd * rng.normal();
    }
    for (auto& x : p.w2) x = sd * rng.normal();
    return p;
}

bool MlpParams::same_shape(const MlpParams& other) const noexcept {
    return arch == other.arch && w1.rows() == other.w1.rows() && w1.cols() == other.w1.cols() &&
           w2.size() == other.w2.size();
}

Vector MlpParams::flatten() const {
    Vector flat(static_cast<Eigen::Index>(num_params()));
    flat.head(w1.size()) = w1.reshaped();
    flat.tail(w2.size()) = w2;
    return flat;
}

void MlpParams::assign_flat(const Vector& flat) {
    if (static_cast<std::size_t>(flat.size()) != num_params()) throw std::invalid_argument("MlpParams: size mismatch");
    w1.reshaped() = flat.head(w1.size());
    w2 = flat.tail(w2.size());
}

void MlpParams::axpy(double alpha, const MlpParams& x) {
    if (!same_shape(x)) throw std::invalid_argument("MlpParams: shape mismatch");
    w1 += alpha * x.w1;
    w2 += alpha * x.w2;
}

double MlpParams::squared_distance(const MlpParams& other) const {
    if (!same_shape(other)) throw std::invalid_argument("MlpParams: shape mismatch");
    return (w1 - other.w1).squaredNorm() + (w2 - other.w2).squaredNorm();
}

double forward(const MlpParams& params, const Vector& a, Activation act, const Vector* hidden_scale) {
    if (a.size() != params.w1.cols()) throw std::invalid_argument("forward: input dimension mismatch");
    if (params.arch == Architecture::neuron) return activate(params.w1.row(0).dot(a), act);
    if (params.w2.size() != params.w1.rows()) throw std::invalid_argument("forward: w2 size mismatch");
    const Vector pre = params.w1 * a;
    double out = 0.0;
    for (Eigen::Index i = 0; i < pre.size(); ++i) {
        double h = activate(pre[i], act);
        if (hidden_scale != nullptr) h *= (*hidden_scale)[i];
        out += params.w2[i] * h;
    }
    return out;
}

LossGradient loss_and_gradient(const MlpParams& params, const MlpParams& anchor, std::span<const TrainingSample> batch,
                               double prior_var, double noise_var, Activation act, std::span<const Vector> masks) {
    if (!masks.empty() && masks.size() != batch.size()) {
        throw std::invalid_argument("loss_and_gradient: need one mask per sample");
    }
    std::vector<SampleRef> refs;
    refs.reserve(batch.size());
    for (std::size_t s = 0; s < batch.size(); ++s) {
        refs.push_back({&batch[s].action, batch[s].target, masks.empty() ? nullptr : &masks[s]});
    }
    return loss_and_gradient(params, anchor, std::span<const SampleRef>(refs), prior_var, noise_var, act);
}

LossGradient loss_and_gradient(const MlpParams& params, const MlpParams& anchor, std::span<const SampleRef> batch,
                               double prior_var, double noise_var, Activation act) {
    if (batch.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
    if (!(prior_var > 0.0) || !(noise_var > 0.0)) {
        throw std::invalid_argument("loss_and_gradient: variances must be positive");
    }
    if (!params.same_shape(anchor)) throw std::invalid_argument("loss_and_gradient: anchor shape mismatch");

    LossGradient out{0.0, MlpParams::zeros(params.arch, params.input_dim(), params.hidden())};
    const auto d = params.w1.rows();
    Vector pre(d);
    Vector back(d);
    for (const SampleRef& sample : batch) {
        const Vector& a = *sample.action;
        if (a.size() != params.w1.cols()) throw std::invalid_argument("loss_and_gradient: input dimension mismatch");
        if (params.arch == Architecture::neuron) {
            const double z = params.w1.row(0).dot(a);
            const double err = sample.target - activate(z, act);
            out.loss += err * err / noise_var;
            out.grad.w1.row(0) += (-2.0 * err / noise_var * activate_slope(z, act)) * a.transpose();
            continue;
        }
        const Vector* scale = sample.mask;
        if (scale != nullptr && scale->size() != d) throw std::invalid_argument("loss_and_gradient: mask size mismatch");
        pre.noalias() = params.w1 * a;
        double g = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            const double sc = scale ? (*scale)[i] : 1.0;
            const double h = activate(pre[i], act) * sc;
            g += params.w2[i] * h;
            back[i] = params.w2[i] * sc * activate_slope(pre[i], act);
            pre[i] = h;  // reused as the hidden output for the w2 gradient
        }
        const double err = sample.target - g;
        const double dg = -2.0 * err / noise_var;
        out.loss += err * err / noise_var;
        out.grad.w2 += dg * pre;
        out.grad.w1.noalias() += (dg * back) * a.transpose();
    }
    out.loss += params.squared_distance(anchor) / prior_var;
    out.grad.axpy(2.0 / prior_var, params);
    out.grad.axpy(-2.0 / prior_var, anchor);
    return out;
}

}  // namespace ensamp
