#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "latent/mat.hpp"

namespace latent::nn {

/// Fully connected layer: y = W x + b, W is out x in.
struct DenseLayer {
    Mat weights;
    Vec bias;

    DenseLayer() = default;
    DenseLayer(std::size_t out_dim, std::size_t in_dim)
        : weights(out_dim, in_dim), bias(out_dim, 0.0) {}

    std::size_t in_dim() const { return weights.cols; }
    std::size_t out_dim() const { return weights.rows; }
};

Vec dense_forward(const DenseLayer& layer, const Vec& x);

/// Backward rule for a dense layer. `dy` is the loss gradient at the output.
/// Accumulates parameter gradients into `grad` (same shapes as `layer`, may be
/// null when only the input gradient is needed) and returns dL/dx.
Vec dense_backward(const DenseLayer& layer, const Vec& x, const Vec& dy, DenseLayer* grad);

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double relu_grad(double x) { return x > 0.0 ? 1.0 : 0.0; }
double sigmoid(double x);

/// Probability clamp applied before the logs in the BCE value.
inline constexpr double kBceEps = 1e-7;

/// Binary cross entropy -y log p - (1-y) log(1-p); p is clamped to
/// [kBceEps, 1-kBceEps] so the value stays finite. The gradient w.r.t. the
/// pre-sigmoid logit is the usual p - y (computed at call sites).
double bce_loss(double p, double y);

/// Euclidean norm of a - b.
double l2_distance(const Vec& a, const Vec& b);

/// Gradient of ||v||_2 w.r.t. v: v / ||v||, defined as the zero vector when
/// the norm is below `eps` (the norm is not differentiable at 0).
Vec l2_norm_grad(const Vec& v, double eps = 1e-12);

/// Named view over one parameter tensor of a model.
struct TensorRef {
    std::string name;
    std::span<double> values;
};
struct TensorCRef {
    std::string name;
    std::span<const double> values;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Optimizer state: one first/second moment accumulator per parameter tensor,
/// plus the shared step counter. Shapes are fixed at construction.
struct AdamState {
    AdamConfig config;
    std::vector<Vec> first_moment;
    std::vector<Vec> second_moment;
    std::int64_t step = 0;

    AdamState() = default;
    AdamState(const std::vector<TensorRef>& params, AdamConfig cfg);
};

/// One bias-corrected Adam step, in place. Throws std::runtime_error naming
/// the offending tensor if any gradient entry is non-finite.
void adam_update(const std::vector<TensorRef>& params, const std::vector<TensorCRef>& grads,
                 AdamState& state);

/// Central-difference gradient verification. `analytic` holds the already
/// computed gradients (parallel to `params`); `loss` re-evaluates the scalar
/// loss at the current parameter values. Every parameter entry is perturbed
/// by +/-step and the numeric derivative compared against the analytic one
/// with relative error |a - n| / max(|a|, |n|, 1e-8). Returns the worst
/// relative error (0 for a model with no parameters).
double grad_check(const std::vector<TensorRef>& params, const std::vector<Vec>& analytic,
                  const std::function<double()>& loss, double step = 1e-5);

}  // namespace latent::nn
