#pragma once

#include <string>
#include <vector>

#include "latent/classifier.hpp"
#include "latent/transformer.hpp"
#include "latent/world.hpp"

namespace latent {

struct MetricsPoint {
    double factor = 0.0;
    double change_rate = 0.0;
    double preservation_rate = 1.0;
    double identity_score = 1.0;
};

/// Fraction of samples whose judge-assigned hard label (strict > 0.5) of
/// attribute k differs between original and edited code.
double change_rate(const ClassifierModel& judge, const std::vector<const LatentCode*>& originals,
                   const std::vector<const LatentCode*>& edited, std::size_t k);

/// Per non-target attribute, the fraction of samples whose hard label is
/// unchanged; macro-averaged over the attributes.
double preservation_rate(const ClassifierModel& judge,
                         const std::vector<const LatentCode*>& originals,
                         const std::vector<const LatentCode*>& edited, std::size_t k);

/// Mean cosine similarity of the oracle identity embeddings. Zero-norm
/// embeddings contribute 0 and emit a warning on stderr.
double identity_score(const OracleWorld& world, const std::vector<const LatentCode*>& originals,
                      const std::vector<const LatentCode*>& edited);

struct EvalConfig {
    double d = 1.0;  // suggested magnitude for this method
    std::size_t count = 10;
};

struct AttributeCurve {
    std::size_t attribute = 0;
    std::vector<MetricsPoint> points;  // factor 0 row first, then the sweep factors
};

/// Sweeps each attribute's transformer over the test split and measures the
/// three metrics at every factor. Edits are flip-directed: each sample is
/// pushed toward toggling its judge-predicted label at the source code
/// (alpha = +factor when the label is absent, -factor when present). A
/// factor-0 reference row (change 0, preservation 1, identity 1) is
/// prepended.
std::vector<AttributeCurve> run_eval(const std::vector<const TransformerModel*>& models,
                                     const LatentDataset& dataset, const ClassifierModel& judge,
                                     const OracleWorld& world, const EvalConfig& config);

struct AblationScenario {
    std::string name;  // full | no_attr | no_rec
    double lambda_attr = 1.0;
    double lambda_rec = 10.0;
};

/// The three standard loss-composition scenarios.
std::vector<AblationScenario> standard_ablation_scenarios(double lambda_attr = 1.0,
                                                          double lambda_rec = 10.0);

struct AblationResult {
    AblationScenario scenario;
    TransformerModel model;
    std::vector<MetricsPoint> points;
};

/// Trains one transformer per scenario with identical seeds and data order
/// (only the loss weights differ), then evaluates each over the sweep.
/// Scenarios must include full, no_attr and no_rec.
std::vector<AblationResult> run_ablation(const LatentDataset& dataset,
                                         const ClassifierModel& classifier,
                                         std::size_t target_attribute, const Vec& gamma_row,
                                         const std::vector<AblationScenario>& scenarios,
                                         const TransformerTrainConfig& base_config,
                                         const ClassifierModel& judge, const OracleWorld& world,
                                         const EvalConfig& eval_config);

struct InterpolatedPoint {
    bool reached = false;
    double factor = 0.0;
    double preservation_rate = 0.0;
    double identity_score = 0.0;
};

/// Linear interpolation along a curve at the first crossing of
/// change_rate == target. reached is false when the curve never gets there.
InterpolatedPoint interpolate_at_change(const std::vector<MetricsPoint>& points, double target);

}  // namespace latent
