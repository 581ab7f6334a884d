#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "latent/eval.hpp"
#include "latent/transformer.hpp"
#include "latent/world.hpp"

namespace latent {

/// Every knob of the pipeline in one self-describing document. CLI flags
/// override file values.
struct RunConfig {
    std::uint64_t seed = 7;

    // world
    std::size_t layers = 4;
    std::size_t dim = 32;
    std::size_t attrs = 8;
    std::size_t embed_dim = 16;
    // Default links attribute 1 to attribute 0 at a shared fraction chosen so
    // the label correlation lands near 0.5 on the 128-dim default world.
    std::vector<CorrelationLink> correlation_spec{{0, 1, 0.92}};

    // data
    std::size_t samples = 4000;
    double split_fraction = 0.9;

    // training
    std::size_t classifier_iterations = 2000;
    std::size_t transformer_iterations = 5000;
    std::size_t batch_size = 32;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double lambda_attr = 1.0;
    double lambda_rec = 10.0;
    int classifier_depth = 3;
    std::size_t hidden_width = 64;
    int judge_depth = 2;
    std::size_t judge_hidden_width = 64;
    TransformerVariant variant = TransformerVariant::linear;
    std::size_t transformer_hidden_width = 0;
    bool squared_norms = false;
    std::size_t log_every = 10;

    // eval
    double eval_d = 1.0;
    std::size_t eval_count = 10;
};

nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);  // missing keys keep defaults
RunConfig load_run_config(const std::filesystem::path& path);

/// Stage seeds derived from the master seed.
std::uint64_t dataset_seed(const RunConfig& config);
std::uint64_t classifier_seed(const RunConfig& config);
std::uint64_t judge_seed(const RunConfig& config);
std::uint64_t transformer_seed(const RunConfig& config, std::size_t attribute);

/// Artifact file layout under the artifact root.
struct PipelinePaths {
    std::filesystem::path root;

    std::filesystem::path manifest() const { return root / "manifest.json"; }
    std::filesystem::path world() const { return root / "world.json"; }
    std::filesystem::path dataset() const { return root / "dataset.csv"; }
    std::filesystem::path correlation() const { return root / "correlation.csv"; }
    std::filesystem::path classifier() const { return root / "classifier.json"; }
    std::filesystem::path classifier_loss() const { return root / "classifier_loss.csv"; }
    std::filesystem::path judge() const { return root / "judge.json"; }
    std::filesystem::path judge_loss() const { return root / "judge_loss.csv"; }
    std::filesystem::path transformer(std::size_t k) const {
        return root / ("transformer_attr_" + std::to_string(k) + ".json");
    }
    std::filesystem::path transformer_loss(std::size_t k) const {
        return root / ("transformer_attr_" + std::to_string(k) + "_loss.csv");
    }
    std::filesystem::path eval_csv() const { return root / "eval.csv"; }
    std::filesystem::path eval_summary() const { return root / "eval_summary.json"; }
    std::filesystem::path ablation_csv(std::size_t k) const {
        return root / ("ablation_attr_" + std::to_string(k) + ".csv");
    }
    std::filesystem::path ablation_summary(std::size_t k) const {
        return root / ("ablation_attr_" + std::to_string(k) + ".json");
    }
};

/// Loaded pipeline state shared by the commands.
struct PipelineStore {
    RunConfig config;
    PipelinePaths paths;

    OracleWorld load_world() const;
    LatentDataset load_dataset() const;
    ClassifierModel load_classifier() const;
    ClassifierModel load_judge() const;
    TransformerModel load_transformer(std::size_t attribute) const;

    std::size_t attribute_index(const std::string& name) const;
};

// Commands. Each is a pure function of (config, inputs, seed): reruns with
// the same seed reproduce identical artifact bytes. Inputs are never
// modified.

void cmd_gen_world(const RunConfig& config, const std::filesystem::path& root, std::ostream& log);

enum class TrainStage { classifier, judge };
void cmd_train_classifier(const RunConfig& config, const std::filesystem::path& root,
                          TrainStage stage, bool force, std::ostream& log);

/// Trains transformers for the given attribute indices (all when empty).
/// `jobs` > 1 trains disjoint attributes concurrently.
void cmd_train_transformer(const RunConfig& config, const std::filesystem::path& root,
                           std::vector<std::size_t> attributes, std::size_t jobs, bool force,
                           std::ostream& log);

struct EditScriptStep {
    std::string attribute;
    double alpha = 0.0;
};
std::vector<EditScriptStep> parse_edit_script(const std::string& script);

void cmd_edit(const RunConfig& config, const std::filesystem::path& root,
              const std::filesystem::path& input_csv, const std::string& script,
              const std::filesystem::path& output_csv,
              const std::optional<std::filesystem::path>& intermediates_csv,
              bool fixed_displacement, std::ostream& log);

void cmd_sweep(const RunConfig& config, const std::filesystem::path& root,
               const std::filesystem::path& input_csv, std::size_t row,
               const std::string& attribute, const std::filesystem::path& output_csv,
               std::ostream& log);

/// Returns false when a metric invariant (rates in bounds) is violated.
bool cmd_eval(const RunConfig& config, const std::filesystem::path& root, std::ostream& log);

void cmd_ablate(const RunConfig& config, const std::filesystem::path& root,
                const std::string& attribute, std::ostream& log);

void cmd_smooth(const std::filesystem::path& track_csv, double sigma,
                const std::filesystem::path& output_csv, std::ostream& log);

void cmd_blend(const std::filesystem::path& source_ppm, const std::filesystem::path& target_ppm,
               const std::filesystem::path& mask_pgm, const std::filesystem::path& output_ppm,
               std::ostream& log);

}  // namespace latent
