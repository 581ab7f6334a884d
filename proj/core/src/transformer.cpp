#include "latent/transformer.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "latent/rng.hpp"

namespace latent {

std::string to_string(TransformerVariant v) {
    switch (v) {
        case TransformerVariant::linear: return "linear";
        case TransformerVariant::two_layer: return "two_layer";
        case TransformerVariant::bias_only: return "bias_only";
    }
    throw std::logic_error("unknown transformer variant");
}

TransformerVariant transformer_variant_from_string(const std::string& name) {
    if (name == "linear") return TransformerVariant::linear;
    if (name == "two_layer") return TransformerVariant::two_layer;
    if (name == "bias_only") return TransformerVariant::bias_only;
    throw std::invalid_argument("unknown transformer variant '" + name + "'");
}

std::size_t TransformerModel::input_dim() const {
    if (variant_ == TransformerVariant::bias_only) return direction_.size();
    return layers_.empty() ? 0 : layers_.front().in_dim();
}

Vec TransformerModel::edit_direction(const Vec& flat) const {
    require(flat.size() == input_dim(), "edit_direction: code length " +
                                            std::to_string(flat.size()) +
                                            " does not match transformer input " +
                                            std::to_string(input_dim()));
    switch (variant_) {
        case TransformerVariant::bias_only: return direction_;
        case TransformerVariant::linear: return nn::dense_forward(layers_[0], flat);
        case TransformerVariant::two_layer: {
            Vec h = nn::dense_forward(layers_[0], flat);
            for (auto& v : h) v = nn::relu(v);
            return nn::dense_forward(layers_[1], h);
        }
    }
    throw std::logic_error("unknown transformer variant");
}

LatentCode TransformerModel::apply(const LatentCode& code, double alpha) const {
    require(std::isfinite(alpha), "apply: alpha must be finite");
    require(code.flat_dim() == input_dim(), "apply: code shape does not match transformer");
    if (alpha == 0.0) return code;  // exact identity contract
    const Vec f = edit_direction(code.values);
    LatentCode out = code;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += alpha * f[i];
    return out;
}

TransformerModel::Trace TransformerModel::forward_trace(const Vec& flat) const {
    Trace trace;
    trace.input = flat;
    switch (variant_) {
        case TransformerVariant::bias_only:
            trace.direction = direction_;
            break;
        case TransformerVariant::linear:
            trace.direction = nn::dense_forward(layers_[0], flat);
            break;
        case TransformerVariant::two_layer: {
            trace.hidden_pre = nn::dense_forward(layers_[0], flat);
            Vec h = trace.hidden_pre;
            for (auto& v : h) v = nn::relu(v);
            trace.direction = nn::dense_forward(layers_[1], h);
            break;
        }
    }
    return trace;
}

void TransformerModel::backward(const Trace& trace, const Vec& ddirection,
                                TransformerModel& grads) const {
    switch (variant_) {
        case TransformerVariant::bias_only:
            for (std::size_t i = 0; i < ddirection.size(); ++i)
                grads.direction_[i] += ddirection[i];
            break;
        case TransformerVariant::linear:
            nn::dense_backward(layers_[0], trace.input, ddirection, &grads.layers_[0]);
            break;
        case TransformerVariant::two_layer: {
            Vec h = trace.hidden_pre;
            for (auto& v : h) v = nn::relu(v);
            Vec dh = nn::dense_backward(layers_[1], h, ddirection, &grads.layers_[1]);
            for (std::size_t i = 0; i < dh.size(); ++i)
                dh[i] *= nn::relu_grad(trace.hidden_pre[i]);
            nn::dense_backward(layers_[0], trace.input, dh, &grads.layers_[0]);
            break;
        }
    }
}

TransformerModel TransformerModel::zero_like() const {
    TransformerModel z;
    z.variant_ = variant_;
    z.target_ = target_;
    z.direction_.assign(direction_.size(), 0.0);
    z.layers_.reserve(layers_.size());
    for (const auto& layer : layers_) z.layers_.emplace_back(layer.out_dim(), layer.in_dim());
    return z;
}

std::vector<nn::TensorRef> TransformerModel::param_refs() {
    if (variant_ == TransformerVariant::bias_only) return {{"direction", direction_}};
    return ClassifierModel::refs_of(layers_);
}

std::vector<nn::TensorCRef> TransformerModel::param_crefs() const {
    if (variant_ == TransformerVariant::bias_only) return {{"direction", direction_}};
    return ClassifierModel::crefs_of(layers_);
}

TransformerModel make_transformer(TransformerVariant variant, std::size_t input_dim,
                                  std::size_t target_attribute, std::uint64_t seed,
                                  std::size_t hidden_width) {
    require(input_dim >= 1, "make_transformer: input_dim must be positive");
    TransformerModel model;
    model.variant_ = variant;
    model.target_ = target_attribute;
    switch (variant) {
        case TransformerVariant::bias_only:
            model.direction_.assign(input_dim, 0.0);
            break;
        case TransformerVariant::linear:
            model.layers_.emplace_back(input_dim, input_dim);
            break;
        case TransformerVariant::two_layer: {
            const std::size_t hidden = hidden_width == 0 ? input_dim : hidden_width;
            nn::DenseLayer first(hidden, input_dim);
            Rng rng(derive_seed(seed, 0x77F0ull));
            const double scale = std::sqrt(2.0 / static_cast<double>(input_dim));
            for (auto& w : first.weights.data) w = scale * rng.gaussian();
            model.layers_.push_back(std::move(first));
            model.layers_.emplace_back(input_dim, hidden);  // zero: f starts at 0
            break;
        }
    }
    return model;
}

double training_alpha(double p) {
    require(p >= 0.0 && p <= 1.0, "training_alpha: probability outside [0,1]");
    if (p < 0.5) return 1.0 - p;
    if (p > 0.5) return -p;
    return 0.5;  // tie: treat the attribute as absent and push toward present
}

TransformLossReport transform_loss(const TransformerModel& model,
                                   const ClassifierModel& classifier,
                                   const std::vector<const LatentCode*>& batch,
                                   const Vec& gamma_row, const TransformLossConfig& config,
                                   TransformerModel* grads) {
    require(classifier.frozen(), "transform_loss: classifier must be frozen");
    require(!batch.empty(), "transform_loss: empty batch");
    const std::size_t k = model.target_attribute();
    const std::size_t n_attrs = classifier.outputs();
    require(k < n_attrs, "transform_loss: target attribute out of range");
    require(gamma_row.size() == n_attrs, "transform_loss: gamma row length mismatch");

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    TransformLossReport report;

    for (const LatentCode* code : batch) {
        const Vec base_probs = classifier.predict(*code);
        const double alpha = training_alpha(base_probs[k]);
        const double y = alpha > 0.0 ? 1.0 : 0.0;

        const auto t_trace = model.forward_trace(code->values);
        Vec displaced(code->values.size());
        Vec displacement(code->values.size());
        for (std::size_t i = 0; i < displaced.size(); ++i) {
            displacement[i] = alpha * t_trace.direction[i];
            displaced[i] = code->values[i] + displacement[i];
        }

        const auto c_trace = classifier.forward_trace(displaced);
        const Vec& probs = c_trace.probs;

        report.l_cls += inv_b * nn::bce_loss(probs[k], y);
        double attr = 0.0;
        for (std::size_t i = 0; i < n_attrs; ++i) {
            if (i == k) continue;
            const double weight = 1.0 - gamma_row[i];
            if (weight == 0.0) continue;  // fully correlated attributes are exempt
            const double diff = probs[i] - base_probs[i];
            attr += weight * (config.squared_norms ? diff * diff : std::fabs(diff));
        }
        report.l_attr += inv_b * attr;

        double rec_norm = 0.0;
        for (double v : displacement) rec_norm += v * v;
        report.l_rec += inv_b * (config.squared_norms ? rec_norm : std::sqrt(rec_norm));

        if (grads != nullptr) {
            // Gradients w.r.t. the output logits of the displaced code.
            Vec dlogits(n_attrs, 0.0);
            dlogits[k] = inv_b * (probs[k] - y);
            for (std::size_t i = 0; i < n_attrs; ++i) {
                if (i == k) continue;
                const double weight = 1.0 - gamma_row[i];
                if (weight == 0.0) continue;
                const double diff = probs[i] - base_probs[i];
                const double dp = config.squared_norms
                                      ? 2.0 * diff
                                      : (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0));
                dlogits[i] = config.lambda_attr * weight * inv_b * dp * probs[i] * (1.0 - probs[i]);
            }
            Vec dcode = classifier.backward_logits(c_trace, dlogits, nullptr);

            // Reconstruction term gradient w.r.t. the displacement.
            Vec drec;
            if (config.squared_norms) {
                drec.resize(displacement.size());
                for (std::size_t i = 0; i < displacement.size(); ++i)
                    drec[i] = 2.0 * displacement[i];
            } else {
                drec = nn::l2_norm_grad(displacement);
            }

            Vec ddirection(displacement.size());
            for (std::size_t i = 0; i < ddirection.size(); ++i) {
                ddirection[i] =
                    alpha * (dcode[i] + config.lambda_rec * inv_b * drec[i]);
            }
            model.backward(t_trace, ddirection, *grads);
        }
    }

    report.total = report.l_cls + config.lambda_attr * report.l_attr +
                   config.lambda_rec * report.l_rec;
    if (!std::isfinite(report.total)) {
        throw std::runtime_error("transform_loss: non-finite loss");
    }
    return report;
}

TransformerTrainResult train_transformer(const LatentDataset& dataset,
                                         const ClassifierModel& classifier,
                                         std::size_t target_attribute, const Vec& gamma_row,
                                         const TransformerTrainConfig& config) {
    require(classifier.frozen(), "train_transformer: classifier must be frozen");
    require(!dataset.train_indices.empty(), "train_transformer: empty train split");

    const std::size_t input_dim = classifier.input_dim();
    TransformerTrainResult result;
    result.model = make_transformer(config.variant, input_dim, target_attribute,
                                    derive_seed(config.seed, 0x121ull), config.hidden_width);

    auto params = result.model.param_refs();
    nn::AdamState adam(params, {config.lr, config.beta1, config.beta2, 1e-8});
    Rng batch_rng(derive_seed(config.seed, 0xBA7C5ull));
    TransformLossReport last_finite;

    for (std::size_t iter = 0; iter < config.iterations; ++iter) {
        std::vector<const LatentCode*> batch;
        batch.reserve(config.batch_size);
        for (std::size_t b = 0; b < config.batch_size; ++b) {
            const auto idx = dataset.train_indices[batch_rng.index(dataset.train_indices.size())];
            batch.push_back(&dataset.samples[idx].code);
        }
        auto grads = result.model.zero_like();
        TransformLossReport report;
        try {
            report = transform_loss(result.model, classifier, batch, gamma_row, config.loss,
                                    &grads);
        } catch (const std::runtime_error&) {
            std::ostringstream msg;
            msg << "train_transformer: diverged at iteration " << iter
                << "; last finite losses: l_cls=" << last_finite.l_cls
                << " l_attr=" << last_finite.l_attr << " l_rec=" << last_finite.l_rec
                << " total=" << last_finite.total;
            throw std::runtime_error(msg.str());
        }
        last_finite = report;
        nn::adam_update(params, grads.param_crefs(), adam);
        if (iter % config.log_every == 0) result.history.emplace_back(iter, report);
    }
    return result;
}

}  // namespace latent
