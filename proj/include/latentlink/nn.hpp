#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "latentlink/core.hpp"

namespace latentlink {

enum class Activation : std::uint8_t {
    identity = 0,
    relu = 1,
    tanh = 2,
    sigmoid = 3,
};

Mat apply_activation(Activation act, const Mat& z);
/// Derivative expressed from pre-activation z and post-activation a.
Mat activation_derivative(Activation act, const Mat& z, const Mat& a);

struct DenseLayer {
    Mat weight;  // out x in
    Vec bias;    // out
    Activation act = Activation::identity;
};

/// Sequential dense network. Immutable after construction as far as the
/// forward/backward free functions are concerned; training code mutates its
/// own copy through the parameter-vector accessors.
struct Mlp {
    std::vector<DenseLayer> layers;

    int input_dim() const {
        return layers.empty() ? 0 : static_cast<int>(layers.front().weight.cols());
    }
    int output_dim() const {
        return layers.empty() ? 0 : static_cast<int>(layers.back().weight.rows());
    }
};

/// Throws std::invalid_argument if layer dimensions do not chain or any
/// parameter is non-finite.
void validate_mlp(const Mlp& net);

/// Glorot-uniform initialised network; `acts` holds one activation per layer.
Mlp make_mlp(const std::vector<int>& dims, const std::vector<Activation>& acts,
             Rng& rng);
/// Same hidden activation everywhere, explicit output activation.
Mlp make_mlp(const std::vector<int>& dims, Activation hidden, Activation output,
             Rng& rng);

/// Per-layer pre/post activations for one forward pass. Columns are batch
/// samples; a single vector is a one-column batch.
struct MlpCache {
    Mat input;
    std::vector<Mat> pre;
    std::vector<Mat> post;
};

/// Forward pass over a column batch. Rejects dimension mismatches with the
/// offending shapes in the message.
Mat mlp_forward(const Mlp& net, const Mat& x, MlpCache* cache = nullptr);
Vec mlp_forward(const Mlp& net, const Vec& x, MlpCache* cache = nullptr);

struct MlpGrads {
    std::vector<Mat> weight;
    std::vector<Vec> bias;
};

MlpGrads zero_grads(const Mlp& net);
void accumulate(MlpGrads& into, const MlpGrads& from);

/// Backward pass for the loss whose gradient at the output is grad_y
/// (summed over batch columns). Returns the gradient w.r.t. the input and,
/// if `grads` is non-null, accumulates parameter gradients into it.
/// Rejects caches whose shapes do not match this net.
Mat mlp_backward(const Mlp& net, const MlpCache& cache, const Mat& grad_y,
                 MlpGrads* grads = nullptr);

// Flat parameter-vector view, fixed order: per layer, weight row-major then
// bias. Used by the optimiser and the finite-difference checks.
Eigen::Index mlp_param_count(const Mlp& net);
Vec mlp_get_params(const Mlp& net);
void mlp_set_params(Mlp& net, const Vec& params);
Vec grads_to_vec(const Mlp& net, const MlpGrads& grads);

struct AdamConfig {
    Scalar lr = 1e-3;
    Scalar beta1 = 0.9;
    Scalar beta2 = 0.999;
    Scalar epsilon = 1e-8;
};

struct AdamState {
    Vec m;  // first moment
    Vec v;  // second moment
    std::int64_t step = 0;
    AdamConfig cfg;

    explicit AdamState(Eigen::Index n, AdamConfig c = {})
        : m(Vec::Zero(n)), v(Vec::Zero(n)), step(0), cfg(c) {}
};

/// One bias-corrected Adam update, in place. Rejects non-finite gradients
/// and shape mismatches.
void adam_step(AdamState& state, Vec& params, const Vec& grads);

/// Max over coordinates of |analytic - central difference| /
/// max(1e-12, |analytic| + |numeric|).
Scalar grad_check(const std::function<Scalar(const Vec&)>& f,
                  const std::function<Vec(const Vec&)>& analytic_grad,
                  const Vec& x, Scalar step);

}  // namespace latentlink
