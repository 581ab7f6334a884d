#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "latent/classifier.hpp"
#include "latent/eval.hpp"
#include "latent/transformer.hpp"
#include "latent/video.hpp"
#include "latent/world.hpp"

namespace latent {

/// Doubles in CSV files are written with enough digits to round-trip.
std::string format_double(double v);

// --- JSON model/world persistence ---------------------------------------

nlohmann::json world_to_json(const OracleWorld& world);
OracleWorld world_from_json(const nlohmann::json& j);

nlohmann::json classifier_to_json(const ClassifierModel& model);
ClassifierModel classifier_from_json(const nlohmann::json& j);

nlohmann::json transformer_to_json(const TransformerModel& model);
TransformerModel transformer_from_json(const nlohmann::json& j);

void save_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);

// --- CSV formats ----------------------------------------------------------

/// Header names the attribute columns; each row holds the labels followed
/// by the flattened latent values.
void write_dataset_csv(const LatentDataset& dataset, const std::filesystem::path& path);

/// Rebuilds the dataset from the CSV; the train/test split and correlation
/// matrix are recomputed deterministically from (split_seed, split_fraction),
/// matching what sample_dataset produced.
LatentDataset read_dataset_csv(const std::filesystem::path& path, std::size_t layers,
                               std::size_t dim, double split_fraction, std::uint64_t split_seed);

void write_correlation_csv(const Mat& gamma, const std::vector<std::string>& names,
                           const std::filesystem::path& path);

void write_metrics_csv(const ClassifierMetrics& metrics, const std::vector<std::string>& names,
                       const std::filesystem::path& path);

void write_depth_table_csv(const std::vector<std::pair<int, ClassifierMetrics>>& table,
                           const std::filesystem::path& path);

void write_classifier_loss_csv(const ClassifierLossHistory& history,
                               const std::filesystem::path& path);

void write_transformer_loss_csv(const TransformerLossHistory& history,
                                const std::filesystem::path& path);

struct EvalCsvRow {
    std::string attribute;
    double factor = 0.0;
    double change_rate = 0.0;
    double preservation_rate = 0.0;
    double identity_score = 0.0;
    std::string scenario;
};

std::vector<EvalCsvRow> eval_rows(const std::vector<AttributeCurve>& curves,
                                  const std::vector<std::string>& names,
                                  const std::string& scenario);

void write_eval_csv(const std::vector<EvalCsvRow>& rows, const std::filesystem::path& path);

nlohmann::json eval_summary_json(
    const std::vector<std::pair<std::string, std::vector<AttributeCurve>>>& per_scenario,
    const std::vector<std::string>& names);

/// Landmark tracks: frame,point,x,y rows in frame-major order.
void write_track_csv(const LandmarkTrack& track, const std::filesystem::path& path);
LandmarkTrack read_track_csv(const std::filesystem::path& path);

/// Latent sequences: a frame-index column followed by the flattened latent
/// values, one row per frame. `comment` lines are written with a leading #.
void write_sequence_csv(const LatentSequence& seq, const std::filesystem::path& path,
                        const std::vector<std::string>& comments = {});
LatentSequence read_sequence_csv(const std::filesystem::path& path, std::size_t layers,
                                 std::size_t dim);

// --- content hashing and the artifact manifest -----------------------------

/// FNV-1a 64-bit over the file bytes, hex encoded. Corruption check, not
/// cryptographic.
std::string file_hash_hex(const std::filesystem::path& path);

/// Records a content hash and creation metadata per artifact. Loaders verify
/// hashes before trusting a file and fail loudly on mismatch.
class ArtifactManifest {
public:
    static ArtifactManifest load_or_create(const std::filesystem::path& manifest_path);

    /// Hash the artifact and upsert its entry. Key is the filename.
    void record(const std::filesystem::path& artifact, const std::string& kind);

    /// Recompute the hash and compare with the recorded one; throws on
    /// missing entry or mismatch.
    void verify(const std::filesystem::path& artifact) const;

    bool has(const std::filesystem::path& artifact) const;
    std::string recorded_hash(const std::filesystem::path& artifact) const;
    void set_note(const std::string& key, const nlohmann::json& value);

    void save() const;

private:
    std::filesystem::path path_;
    nlohmann::json doc_;
};

}  // namespace latent
