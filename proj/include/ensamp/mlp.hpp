#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "ensamp/gaussian.hpp"
#include "ensamp/rng.hpp"

namespace ensamp {

enum class Architecture { neuron, two_layer };
enum class Activation { relu, leaky_relu, identity };

inline constexpr double kLeakySlope = 0.01;

double activate(double x, Activation act) noexcept;
// Derivative used by backpropagation. At x == 0 the negative-side slope is taken.
double activate_slope(double x, Activation act) noexcept;

// Weights of g(a) = act(w1 a) (neuron, w1 is 1 x N, w2 empty) or
// g(a) = w2^T act(w1 a) (two-layer, w1 is D x N).
struct MlpParams {
    Architecture arch = Architecture::neuron;
    Matrix w1;
    Vector w2;

    static MlpParams neuron(Vector theta);
    static MlpParams two_layer(Matrix w1, Vector w2);
    static MlpParams zeros(Architecture arch, std::size_t input_dim, std::size_t hidden);
    // Every weight i.i.d. N(0, prior_var).
    static MlpParams sample_prior(Architecture arch, std::size_t input_dim, std::size_t hidden, double prior_var,
                                  SeededRng& rng);

    std::size_t input_dim() const noexcept { return static_cast<std::size_t>(w1.cols()); }
    std::size_t hidden() const noexcept { return static_cast<std::size_t>(w1.rows()); }
    std::size_t num_params() const noexcept { return static_cast<std::size_t>(w1.size() + w2.size()); }
    bool same_shape(const MlpParams& other) const noexcept;

    // w1 in column-major order followed by w2.
    Vector flatten() const;
    void assign_flat(const Vector& flat);

    // this += alpha * x
    void axpy(double alpha, const MlpParams& x);
    double squared_distance(const MlpParams& other) const;
    bool all_finite() const { return w1.allFinite() && w2.allFinite(); }

    friend bool operator==(const MlpParams& x, const MlpParams& y) {
        return x.arch == y.arch && x.w1 == y.w1 && x.w2 == y.w2;
    }
};

// hidden_scale, when nonempty, multiplies the hidden units (dropout mask with
// its keep-rate scaling already applied). Ignored for the neuron architecture.
double forward(const MlpParams& params, const Vector& a, Activation act, const Vector* hidden_scale = nullptr);

struct TrainingSample {
    Vector action;
    double target;
};

// Non-owning sample used on the training hot path. mask may be null.
struct SampleRef {
    const Vector* action;
    double target;
    const Vector* mask = nullptr;
};

struct LossGradient {
    double loss;
    MlpParams grad;
};

// (1/noise_var) sum_batch (target - g(a))^2 + (1/prior_var) ||params - anchor||^2
// and its gradient. masks is empty or holds one hidden-unit scale per sample.
LossGradient loss_and_gradient(const MlpParams& params, const MlpParams& anchor, std::span<const TrainingSample> batch,
                               double prior_var, double noise_var, Activation act = Activation::leaky_relu,
                               std::span<const Vector> masks = {});

LossGradient loss_and_gradient(const MlpParams& params, const MlpParams& anchor, std::span<const SampleRef> batch,
                               double prior_var, double noise_var, Activation act = Activation::leaky_relu);

}  // namespace ensamp
