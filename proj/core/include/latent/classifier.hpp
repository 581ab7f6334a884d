#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "latent/nn.hpp"
#include "latent/world.hpp"

namespace latent {

/// MLP over flattened latent codes: ReLU between hidden layers, sigmoid on
/// the output. Depth counts dense layers (1..4). Once trained the model is
/// frozen and reused as a read-only loss oracle.
class ClassifierModel {
public:
    ClassifierModel() = default;

    int depth() const { return static_cast<int>(layers_.size()); }
    std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
    std::size_t outputs() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }
    bool frozen() const { return frozen_; }
    void freeze() { frozen_ = true; }

    /// Attribute probabilities for a code (sigmoid outputs, strictly in (0,1)).
    Vec predict(const LatentCode& code) const;
    Vec predict_flat(const Vec& x) const;

    /// Forward pass keeping the per-layer inputs needed by backward.
    struct Trace {
        std::vector<Vec> layer_inputs;  // input to each dense layer
        std::vector<Vec> pre_acts;      // pre-activation of each layer
        Vec probs;
    };
    Trace forward_trace(const Vec& x) const;

    /// Backprop from gradients w.r.t. the output logits (pre-sigmoid).
    /// Accumulates parameter gradients into `grads` when non-null (same
    /// shapes as layers()) and returns the gradient w.r.t. the input.
    Vec backward_logits(const Trace& trace, const Vec& dlogits,
                        std::vector<nn::DenseLayer>* grads) const;

    std::vector<nn::DenseLayer>& layers() { return layers_; }
    const std::vector<nn::DenseLayer>& layers() const { return layers_; }

    std::vector<nn::DenseLayer> zero_grads() const;
    std::vector<nn::TensorRef> param_refs();
    static std::vector<nn::TensorRef> refs_of(std::vector<nn::DenseLayer>& layers);
    static std::vector<nn::TensorCRef> crefs_of(const std::vector<nn::DenseLayer>& layers);

private:
    friend ClassifierModel build_classifier(int, std::size_t, std::size_t, std::size_t,
                                            std::uint64_t);
    std::vector<nn::DenseLayer> layers_;
    bool frozen_ = false;
};

/// Seeded Kaiming-style init (gaussian scaled by sqrt(2/fan_in), zero
/// biases). Depth must be in {1,2,3,4}.
ClassifierModel build_classifier(int depth, std::size_t hidden_width, std::size_t input_dim,
                                 std::size_t outputs, std::uint64_t seed);

struct ClassifierTrainConfig {
    std::size_t iterations = 2000;
    std::size_t batch_size = 32;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    std::uint64_t seed = 1;
    std::size_t log_every = 10;
};

/// (iteration, mean BCE) pairs sampled every log_every iterations.
using ClassifierLossHistory = std::vector<std::pair<std::size_t, double>>;

/// Adam on seeded mini-batches minimizing mean BCE over all attributes.
/// Freezes the model before returning. Throws on non-finite loss.
ClassifierLossHistory train_classifier(ClassifierModel& model, const LatentDataset& dataset,
                                       const ClassifierTrainConfig& config);

/// Confusion-derived metrics for one attribute. Ratios with zero denominator
/// are left unset and excluded from macro averages.
struct AttributeMetrics {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::optional<double> recall, specificity, precision, f1;
    double accuracy = 0.0;
};

struct ClassifierMetrics {
    std::vector<AttributeMetrics> per_attribute;
    std::optional<double> recall, specificity, precision, f1;  // macro averages
    double accuracy = 0.0;
};

/// Metrics on the test split; hard labels by strict > threshold.
ClassifierMetrics evaluate_classifier(const ClassifierModel& model, const LatentDataset& dataset,
                                      double threshold = 0.5);

/// Trains one classifier per depth (same data, per-depth derived seeds) and
/// evaluates each on the test split.
std::vector<std::pair<int, ClassifierMetrics>> classifier_depth_table(
    const LatentDataset& dataset, std::size_t hidden_width, const ClassifierTrainConfig& config,
    const std::vector<int>& depths = {1, 2, 3, 4});

}  // namespace latent
