#include "latent/classifier.hpp"

#include <cmath>
#include <stdexcept>

#include "latent/rng.hpp"

namespace latent {

Vec ClassifierModel::predict(const LatentCode& code) const { return predict_flat(code.values); }

Vec ClassifierModel::predict_flat(const Vec& x) const {
    require(x.size() == input_dim(), "predict: code length " + std::to_string(x.size()) +
                                         " does not match classifier input " +
                                         std::to_string(input_dim()));
    Vec a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        a = nn::dense_forward(layers_[l], a);
        if (l + 1 < layers_.size()) {
            for (auto& v : a) v = nn::relu(v);
        }
    }
    for (auto& v : a) v = nn::sigmoid(v);
    return a;
}

ClassifierModel::Trace ClassifierModel::forward_trace(const Vec& x) const {
    require(x.size() == input_dim(), "forward_trace: input length mismatch");
    Trace trace;
    trace.layer_inputs.reserve(layers_.size());
    trace.pre_acts.reserve(layers_.size());
    Vec a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        trace.layer_inputs.push_back(a);
        Vec z = nn::dense_forward(layers_[l], a);
        trace.pre_acts.push_back(z);
        if (l + 1 < layers_.size()) {
            for (auto& v : z) v = nn::relu(v);
        }
        a = std::move(z);
    }
    for (auto& v : a) v = nn::sigmoid(v);
    trace.probs = std::move(a);
    return trace;
}

Vec ClassifierModel::backward_logits(const Trace& trace, const Vec& dlogits,
                                     std::vector<nn::DenseLayer>* grads) const {
    require(dlogits.size() == outputs(), "backward_logits: gradient length mismatch");
    Vec d = dlogits;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        if (l + 1 < layers_.size()) {
            // d arrives w.r.t. relu output; fold in the relu mask.
            for (std::size_t i = 0; i < d.size(); ++i)
                d[i] *= nn::relu_grad(trace.pre_acts[l][i]);
        }
        d = nn::dense_backward(layers_[l], trace.layer_inputs[l], d,
                               grads != nullptr ? &(*grads)[l] : nullptr);
    }
    return d;
}

std::vector<nn::DenseLayer> ClassifierModel::zero_grads() const {
    std::vector<nn::DenseLayer> grads;
    grads.reserve(layers_.size());
    for (const auto& layer : layers_) grads.emplace_back(layer.out_dim(), layer.in_dim());
    return grads;
}

std::vector<nn::TensorRef> ClassifierModel::param_refs() { return refs_of(layers_); }

std::vector<nn::TensorRef> ClassifierModel::refs_of(std::vector<nn::DenseLayer>& layers) {
    std::vector<nn::TensorRef> refs;
    refs.reserve(layers.size() * 2);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        refs.push_back({"layer" + std::to_string(l) + ".weights", layers[l].weights.data});
        refs.push_back({"layer" + std::to_string(l) + ".bias", layers[l].bias});
    }
    return refs;
}

std::vector<nn::TensorCRef> ClassifierModel::crefs_of(const std::vector<nn::DenseLayer>& layers) {
    std::vector<nn::TensorCRef> refs;
    refs.reserve(layers.size() * 2);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        refs.push_back({"layer" + std::to_string(l) + ".weights", layers[l].weights.data});
        refs.push_back({"layer" + std::to_string(l) + ".bias", layers[l].bias});
    }
    return refs;
}

ClassifierModel build_classifier(int depth, std::size_t hidden_width, std::size_t input_dim,
                                 std::size_t outputs, std::uint64_t seed) {
    require(depth >= 1 && depth <= 4, "build_classifier: depth must be in {1,2,3,4}");
    require(hidden_width >= 1 && input_dim >= 1 && outputs >= 1,
            "build_classifier: dimensions must be positive");
    ClassifierModel model;
    Rng rng(seed);
    for (int l = 0; l < depth; ++l) {
        const std::size_t in = (l == 0) ? input_dim : hidden_width;
        const std::size_t out = (l == depth - 1) ? outputs : hidden_width;
        nn::DenseLayer layer(out, in);
        const double scale = std::sqrt(2.0 / static_cast<double>(in));
        for (auto& w : layer.weights.data) w = scale * rng.gaussian();
        model.layers_.push_back(std::move(layer));
    }
    return model;
}

ClassifierLossHistory train_classifier(ClassifierModel& model, const LatentDataset& dataset,
                                       const ClassifierTrainConfig& config) {
    require(!dataset.train_indices.empty(), "train_classifier: empty train split");
    const std::size_t n_attrs = model.outputs();
    require(n_attrs == dataset.attrs(), "train_classifier: attribute count mismatch");

    auto params = model.param_refs();
    nn::AdamState adam(params, {config.lr, config.beta1, config.beta2, 1e-8});
    Rng batch_rng(derive_seed(config.seed, 0xBA7C4ull));
    ClassifierLossHistory history;

    for (std::size_t iter = 0; iter < config.iterations; ++iter) {
        auto grads = model.zero_grads();
        double loss = 0.0;
        const double denom = static_cast<double>(config.batch_size * n_attrs);
        for (std::size_t b = 0; b < config.batch_size; ++b) {
            const auto& sample =
                dataset.samples[dataset.train_indices[batch_rng.index(dataset.train_indices.size())]];
            auto trace = model.forward_trace(sample.code.values);
            Vec dlogits(n_attrs);
            for (std::size_t a = 0; a < n_attrs; ++a) {
                const double y = sample.labels[a];
                loss += nn::bce_loss(trace.probs[a], y) / denom;
                dlogits[a] = (trace.probs[a] - y) / denom;
            }
            model.backward_logits(trace, dlogits, &grads);
        }
        if (!std::isfinite(loss)) {
            throw std::runtime_error("train_classifier: non-finite loss at iteration " +
                                     std::to_string(iter));
        }
        nn::adam_update(params, ClassifierModel::crefs_of(grads), adam);
        if (iter % config.log_every == 0) history.emplace_back(iter, loss);
    }
    model.freeze();
    return history;
}

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

void accumulate_macro(std::optional<double>& acc, std::size_t& count,
                      const std::optional<double>& value) {
    if (value.has_value()) {
        acc = acc.value_or(0.0) + *value;
        ++count;
    }
}

}  // namespace

ClassifierMetrics evaluate_classifier(const ClassifierModel& model, const LatentDataset& dataset,
                                      double threshold) {
    require(!dataset.test_indices.empty(), "evaluate_classifier: empty test split");
    const std::size_t n_attrs = dataset.attrs();
    std::vector<AttributeMetrics> per(n_attrs);
    for (auto idx : dataset.test_indices) {
        const auto& sample = dataset.samples[idx];
        const Vec probs = model.predict(sample.code);
        for (std::size_t a = 0; a < n_attrs; ++a) {
            const bool predicted = probs[a] > threshold;
            const bool actual = sample.labels[a] == 1;
            if (predicted && actual) ++per[a].tp;
            else if (predicted && !actual) ++per[a].fp;
            else if (!predicted && actual) ++per[a].fn;
            else ++per[a].tn;
        }
    }

    ClassifierMetrics metrics;
    std::optional<double> rec_sum, spec_sum, prec_sum, f1_sum;
    std::size_t rec_n = 0, spec_n = 0, prec_n = 0, f1_n = 0;
    double acc_sum = 0.0;
    for (auto& m : per) {
        const std::size_t total = m.tp + m.fp + m.fn + m.tn;
        m.recall = ratio(m.tp, m.tp + m.fn);
        m.specificity = ratio(m.tn, m.tn + m.fp);
        m.precision = ratio(m.tp, m.tp + m.fp);
        m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(total);
        if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0) {
            m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
        }
        accumulate_macro(rec_sum, rec_n, m.recall);
        accumulate_macro(spec_sum, spec_n, m.specificity);
        accumulate_macro(prec_sum, prec_n, m.precision);
        accumulate_macro(f1_sum, f1_n, m.f1);
        acc_sum += m.accuracy;
    }
    if (rec_n > 0) metrics.recall = *rec_sum / static_cast<double>(rec_n);
    if (spec_n > 0) metrics.specificity = *spec_sum / static_cast<double>(spec_n);
    if (prec_n > 0) metrics.precision = *prec_sum / static_cast<double>(prec_n);
    if (f1_n > 0) metrics.f1 = *f1_sum / static_cast<double>(f1_n);
    metrics.accuracy = acc_sum / static_cast<double>(n_attrs);
    metrics.per_attribute = std::move(per);
    return metrics;
}

std::vector<std::pair<int, ClassifierMetrics>> classifier_depth_table(
    const LatentDataset& dataset, std::size_t hidden_width, const ClassifierTrainConfig& config,
    const std::vector<int>& depths) {
    const std::size_t input_dim = dataset.samples.front().code.flat_dim();
    std::vector<std::pair<int, ClassifierMetrics>> table;
    table.reserve(depths.size());
    for (int depth : depths) {
        auto model = build_classifier(depth, hidden_width, input_dim, dataset.attrs(),
                                      derive_seed(config.seed, 0xDE9000ull + depth));
        auto cfg = config;
        cfg.seed = derive_seed(config.seed, 0xDE9100ull + depth);
        train_classifier(model, dataset, cfg);
        table.emplace_back(depth, evaluate_classifier(model, dataset));
    }
    return table;
}

}  // namespace latent
