#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "latent/classifier.hpp"
#include "latent/nn.hpp"
#include "latent/world.hpp"

namespace latent {

enum class TransformerVariant { linear, two_layer, bias_only };

std::string to_string(TransformerVariant v);
TransformerVariant transformer_variant_from_string(const std::string& name);

/// Per-attribute editing network: moves a code along a learned displacement,
/// code + alpha * f(code). The displacement network f is one dense layer
/// (linear), a two-layer ReLU MLP, or a constant direction (bias_only).
class TransformerModel {
public:
    TransformerModel() = default;

    TransformerVariant variant() const { return variant_; }
    std::size_t target_attribute() const { return target_; }
    std::size_t input_dim() const;

    /// The displacement f(flat). Code-independent for bias_only.
    Vec edit_direction(const Vec& flat) const;
    Vec edit_direction(const LatentCode& code) const { return edit_direction(code.values); }

    /// code + alpha * f(code), reshaped to the input layout. alpha == 0
    /// returns the input bit-exactly.
    LatentCode apply(const LatentCode& code, double alpha) const;

    struct Trace {
        Vec input;
        Vec hidden_pre;  // two_layer only
        Vec direction;
    };
    Trace forward_trace(const Vec& flat) const;

    /// Accumulates parameter gradients given dL/d f into `grads` (a
    /// zero_like() model of the same shape).
    void backward(const Trace& trace, const Vec& ddirection, TransformerModel& grads) const;

    TransformerModel zero_like() const;
    std::vector<nn::TensorRef> param_refs();
    std::vector<nn::TensorCRef> param_crefs() const;

    std::vector<nn::DenseLayer>& layers() { return layers_; }
    const std::vector<nn::DenseLayer>& layers() const { return layers_; }
    Vec& bias_direction() { return direction_; }
    const Vec& bias_direction() const { return direction_; }
    void set_target_attribute(std::size_t k) { target_ = k; }

private:
    friend TransformerModel make_transformer(TransformerVariant, std::size_t, std::size_t,
                                             std::uint64_t, std::size_t);
    TransformerVariant variant_ = TransformerVariant::linear;
    std::size_t target_ = 0;
    std::vector<nn::DenseLayer> layers_;  // linear: 1 layer; two_layer: 2 layers
    Vec direction_;                       // bias_only
};

/// Fresh transformer with f == 0, so the initial transform is the identity.
/// For two_layer the hidden layer is Kaiming-seeded and only the output
/// layer starts at zero; a fully zero two-layer net would never receive
/// gradient through its hidden weights. hidden_width 0 means input_dim.
TransformerModel make_transformer(TransformerVariant variant, std::size_t input_dim,
                                  std::size_t target_attribute, std::uint64_t seed = 0,
                                  std::size_t hidden_width = 0);

/// Training-time scaling factor from the classifier probability of the
/// target attribute: 1-p below 0.5, -p above, and 0.5 at the tie (treated
/// as pushing the attribute toward present).
double training_alpha(double p);

struct TransformLossConfig {
    double lambda_attr = 1.0;
    double lambda_rec = 10.0;
    bool squared_norms = false;  // use ||.||^2 instead of ||.|| in the regularizers
};

struct TransformLossReport {
    double l_cls = 0.0;
    double l_attr = 0.0;
    double l_rec = 0.0;
    double total = 0.0;
};

/// Batch-averaged training loss and, optionally, its gradients w.r.t. the
/// transformer parameters. Per sample: alpha = training_alpha(C(w)[k]) with
/// desired label y = 1 iff alpha > 0; the classification term scores
/// C(apply(w, alpha))[k] against y; the attribute term sums
/// (1 - gamma_ik) |p_i - C(w)[i]| over i != k; the reconstruction term is
/// the displacement norm. The classifier stays frozen; gradients flow
/// through it to the transformer only.
TransformLossReport transform_loss(const TransformerModel& model,
                                   const ClassifierModel& classifier,
                                   const std::vector<const LatentCode*>& batch,
                                   const Vec& gamma_row, const TransformLossConfig& config,
                                   TransformerModel* grads = nullptr);

struct TransformerTrainConfig {
    TransformerVariant variant = TransformerVariant::linear;
    std::size_t iterations = 5000;  // desk-scale default; the reference setup runs 100k
    std::size_t batch_size = 32;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    TransformLossConfig loss;
    std::uint64_t seed = 1;
    std::size_t log_every = 10;
    std::size_t hidden_width = 0;  // two_layer only; 0 means input_dim
};

using TransformerLossHistory = std::vector<std::pair<std::size_t, TransformLossReport>>;

struct TransformerTrainResult {
    TransformerModel model;
    TransformerLossHistory history;
};

/// Adam over seeded mini-batches from the train split. gamma_row is row k of
/// the dataset's train-split correlation matrix, frozen before training.
/// Aborts (throws) on non-finite loss, reporting the last finite losses.
TransformerTrainResult train_transformer(const LatentDataset& dataset,
                                         const ClassifierModel& classifier,
                                         std::size_t target_attribute, const Vec& gamma_row,
                                         const TransformerTrainConfig& config);

}  // namespace latent
