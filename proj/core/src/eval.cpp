#include "latent/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "latent/edit.hpp"
#include "latent/rng.hpp"

namespace latent {

namespace {

std::vector<int> hard_labels(const ClassifierModel& judge, const LatentCode& code) {
    const Vec probs = judge.predict(code);
    std::vector<int> labels(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) labels[i] = probs[i] > 0.5 ? 1 : 0;
    return labels;
}

}  // namespace

double change_rate(const ClassifierModel& judge, const std::vector<const LatentCode*>& originals,
                   const std::vector<const LatentCode*>& edited, std::size_t k) {
    require(!originals.empty(), "change_rate: empty sample list");
    require(originals.size() == edited.size(), "change_rate: list length mismatch");
    std::size_t changed = 0;
    for (std::size_t s = 0; s < originals.size(); ++s) {
        if (hard_labels(judge, *originals[s])[k] != hard_labels(judge, *edited[s])[k]) ++changed;
    }
    return static_cast<double>(changed) / static_cast<double>(originals.size());
}

double preservation_rate(const ClassifierModel& judge,
                         const std::vector<const LatentCode*>& originals,
                         const std::vector<const LatentCode*>& edited, std::size_t k) {
    require(!originals.empty(), "preservation_rate: empty sample list");
    require(originals.size() == edited.size(), "preservation_rate: list length mismatch");
    const std::size_t n_attrs = judge.outputs();
    require(n_attrs >= 2, "preservation_rate: need at least two attributes");
    std::vector<std::size_t> unchanged(n_attrs, 0);
    for (std::size_t s = 0; s < originals.size(); ++s) {
        const auto before = hard_labels(judge, *originals[s]);
        const auto after = hard_labels(judge, *edited[s]);
        for (std::size_t i = 0; i < n_attrs; ++i) {
            if (i != k && before[i] == after[i]) ++unchanged[i];
        }
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n_attrs; ++i) {
        if (i == k) continue;
        acc += static_cast<double>(unchanged[i]) / static_cast<double>(originals.size());
    }
    return acc / static_cast<double>(n_attrs - 1);
}

double identity_score(const OracleWorld& world, const std::vector<const LatentCode*>& originals,
                      const std::vector<const LatentCode*>& edited) {
    require(!originals.empty(), "identity_score: empty sample list");
    require(originals.size() == edited.size(), "identity_score: list length mismatch");
    double acc = 0.0;
    std::size_t degenerate = 0;
    for (std::size_t s = 0; s < originals.size(); ++s) {
        const Vec a = identity_embed(world, *originals[s]);
        const Vec b = identity_embed(world, *edited[s]);
        const double na = std::sqrt(dot(a, a));
        const double nb = std::sqrt(dot(b, b));
        if (na == 0.0 || nb == 0.0) {
            ++degenerate;  // contributes similarity 0
            continue;
        }
        acc += dot(a, b) / (na * nb);
    }
    if (degenerate > 0) {
        std::cerr << "identity_score: " << degenerate
                  << " zero-norm embedding(s) contributed similarity 0\n";
    }
    return acc / static_cast<double>(originals.size());
}

std::vector<AttributeCurve> run_eval(const std::vector<const TransformerModel*>& models,
                                     const LatentDataset& dataset, const ClassifierModel& judge,
                                     const OracleWorld& world, const EvalConfig& config) {
    require(!dataset.test_indices.empty(), "run_eval: empty test split");
    std::vector<const LatentCode*> originals;
    originals.reserve(dataset.test_indices.size());
    for (auto idx : dataset.test_indices) originals.push_back(&dataset.samples[idx].code);

    std::vector<AttributeCurve> curves;
    curves.reserve(models.size());
    for (const TransformerModel* model : models) {
        require(model != nullptr, "run_eval: null model");
        const std::size_t k = model->target_attribute();

        // Per-sample toggle sign from the judge's label at the source code.
        std::vector<double> signs(originals.size());
        for (std::size_t s = 0; s < originals.size(); ++s) {
            signs[s] = hard_labels(judge, *originals[s])[k] == 1 ? -1.0 : 1.0;
        }

        AttributeCurve curve;
        curve.attribute = k;
        curve.points.push_back({0.0, 0.0, 1.0, 1.0});

        std::vector<double> factors;
        for (std::size_t j = 1; j <= config.count; ++j) {
            factors.push_back(static_cast<double>(j) / static_cast<double>(config.count) * 2.0 *
                              config.d);
        }
        if (config.d < 0.0) std::reverse(factors.begin(), factors.end());

        for (double factor : factors) {
            std::vector<LatentCode> edited_storage;
            edited_storage.reserve(originals.size());
            for (std::size_t s = 0; s < originals.size(); ++s) {
                edited_storage.push_back(model->apply(*originals[s], signs[s] * factor));
            }
            std::vector<const LatentCode*> edited;
            edited.reserve(edited_storage.size());
            for (const auto& code : edited_storage) edited.push_back(&code);

            MetricsPoint point;
            point.factor = factor;
            point.change_rate = change_rate(judge, originals, edited, k);
            point.preservation_rate = preservation_rate(judge, originals, edited, k);
            point.identity_score = identity_score(world, originals, edited);
            curve.points.push_back(point);
        }
        curves.push_back(std::move(curve));
    }
    return curves;
}

std::vector<AblationScenario> standard_ablation_scenarios(double lambda_attr, double lambda_rec) {
    return {{"full", lambda_attr, lambda_rec},
            {"no_attr", 0.0, lambda_rec},
            {"no_rec", lambda_attr, 0.0}};
}

std::vector<AblationResult> run_ablation(const LatentDataset& dataset,
                                         const ClassifierModel& classifier,
                                         std::size_t target_attribute, const Vec& gamma_row,
                                         const std::vector<AblationScenario>& scenarios,
                                         const TransformerTrainConfig& base_config,
                                         const ClassifierModel& judge, const OracleWorld& world,
                                         const EvalConfig& eval_config) {
    for (const char* name : {"full", "no_attr", "no_rec"}) {
        const bool found = std::any_of(scenarios.begin(), scenarios.end(),
                                       [&](const auto& s) { return s.name == name; });
        require(found, std::string("run_ablation: missing scenario '") + name + "'");
    }

    std::vector<AblationResult> results;
    results.reserve(scenarios.size());
    for (const auto& scenario : scenarios) {
        auto config = base_config;  // identical seeds and batch order across scenarios
        config.loss.lambda_attr = scenario.lambda_attr;
        config.loss.lambda_rec = scenario.lambda_rec;
        auto trained = train_transformer(dataset, classifier, target_attribute, gamma_row, config);
        auto curves = run_eval({&trained.model}, dataset, judge, world, eval_config);
        results.push_back({scenario, std::move(trained.model), std::move(curves.front().points)});
    }
    return results;
}

InterpolatedPoint interpolate_at_change(const std::vector<MetricsPoint>& points, double target) {
    InterpolatedPoint out;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const auto& lo = points[i - 1];
        const auto& hi = points[i];
        const double a = std::min(lo.change_rate, hi.change_rate);
        const double b = std::max(lo.change_rate, hi.change_rate);
        if (target < a || target > b) continue;
        const double span = hi.change_rate - lo.change_rate;
        const double u = span == 0.0 ? 0.0 : (target - lo.change_rate) / span;
        out.reached = true;
        out.factor = lo.factor + u * (hi.factor - lo.factor);
        out.preservation_rate = lo.preservation_rate + u * (hi.preservation_rate - lo.preservation_rate);
        out.identity_score = lo.identity_score + u * (hi.identity_score - lo.identity_score);
        return out;
    }
    return out;
}

}  // namespace latent
