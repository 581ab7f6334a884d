#include "latent/persist.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace latent {

namespace {

constexpr const char* kIdentityNote =
    "# identity_score uses the oracle identity projection (face-embedding stand-in)";

nlohmann::json mat_to_json(const Mat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat mat_from_json(const nlohmann::json& j) {
    const std::size_t rows = j.size();
    const std::size_t cols = rows == 0 ? 0 : j.at(0).size();
    Mat m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& row = j.at(r);
        if (row.size() != cols) throw std::runtime_error("mat_from_json: ragged rows");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = row.at(c).get<double>();
    }
    return m;
}

nlohmann::json layers_to_json(const std::vector<nn::DenseLayer>& layers) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& layer : layers) {
        out.push_back({{"rows", layer.out_dim()},
                       {"cols", layer.in_dim()},
                       {"weights", layer.weights.data},  // row-major
                       {"bias", layer.bias}});
    }
    return out;
}

std::vector<nn::DenseLayer> layers_from_json(const nlohmann::json& j) {
    std::vector<nn::DenseLayer> layers;
    layers.reserve(j.size());
    for (const auto& lj : j) {
        nn::DenseLayer layer(lj.at("rows").get<std::size_t>(), lj.at("cols").get<std::size_t>());
        layer.weights.data = lj.at("weights").get<Vec>();
        layer.bias = lj.at("bias").get<Vec>();
        if (layer.weights.data.size() != layer.weights.rows * layer.weights.cols ||
            layer.bias.size() != layer.weights.rows) {
            throw std::runtime_error("layers_from_json: inconsistent layer shape");
        }
        layers.push_back(std::move(layer));
    }
    return layers;
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Line-oriented CSV reader that skips # comments and reports byte offsets.
class CsvReader {
public:
    explicit CsvReader(const std::filesystem::path& path) : path_(path.string()), in_(path) {
        if (!in_) throw std::runtime_error(path_ + ": cannot open");
    }

    bool next_row(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            line_offset_ = byte_offset_;
            byte_offset_ += line.size() + 1;
            ++line_number_;
            if (line.empty() || line[0] == '#') continue;
            fields.clear();
            std::size_t start = 0;
            while (true) {
                const auto comma = line.find(',', start);
                fields.push_back(line.substr(start, comma - start));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw std::runtime_error(path_ + ": " + what + " at byte " +
                                 std::to_string(line_offset_) + " (line " +
                                 std::to_string(line_number_) + ")");
    }

    double parse_double(const std::string& field) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(field, &used);
            if (used != field.size()) fail("trailing characters in number '" + field + "'");
            return v;
        } catch (const std::invalid_argument&) {
            fail("expected number, got '" + field + "'");
        } catch (const std::out_of_range&) {
            fail("number out of range '" + field + "'");
        }
    }

    std::size_t parse_index(const std::string& field) const {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(field, &used);
            if (used != field.size()) fail("trailing characters in integer '" + field + "'");
            return static_cast<std::size_t>(v);
        } catch (const std::invalid_argument&) {
            fail("expected integer, got '" + field + "'");
        } catch (const std::out_of_range&) {
            fail("integer out of range '" + field + "'");
        }
    }

private:
    std::string path_;
    std::ifstream in_;
    std::size_t byte_offset_ = 0;
    std::size_t line_offset_ = 0;
    std::size_t line_number_ = 0;
};

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    return out;
}

std::string opt_str(const std::optional<double>& v) {
    return v.has_value() ? format_double(*v) : "undefined";
}

void write_metrics_row(std::ostream& out, const std::string& label, const AttributeMetrics& m) {
    out << label << ',' << opt_str(m.recall) << ',' << opt_str(m.specificity) << ','
        << opt_str(m.precision) << ',' << format_double(m.accuracy) << ',' << opt_str(m.f1)
        << '\n';
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json world_to_json(const OracleWorld& world) {
    nlohmann::json spec = nlohmann::json::array();
    for (const auto& link : world.correlation_spec) {
        spec.push_back({link.first, link.second, link.shared_fraction});
    }
    return {{"seed", world.seed},
            {"layers", world.layers},
            {"dim", world.dim},
            {"attrs", world.attrs},
            {"embed_dim", world.embed_dim},
            {"attribute_directions", mat_to_json(world.attribute_directions)},
            {"attribute_biases", world.attribute_biases},
            {"correlation_spec", spec},
            {"identity_projection", mat_to_json(world.identity_projection)}};
}

OracleWorld world_from_json(const nlohmann::json& j) {
    OracleWorld world;
    world.seed = j.at("seed").get<std::uint64_t>();
    world.layers = j.at("layers").get<std::size_t>();
    world.dim = j.at("dim").get<std::size_t>();
    world.attrs = j.at("attrs").get<std::size_t>();
    world.embed_dim = j.at("embed_dim").get<std::size_t>();
    world.attribute_directions = mat_from_json(j.at("attribute_directions"));
    world.attribute_biases = j.at("attribute_biases").get<Vec>();
    for (const auto& link : j.at("correlation_spec")) {
        world.correlation_spec.push_back({link.at(0).get<std::size_t>(),
                                          link.at(1).get<std::size_t>(),
                                          link.at(2).get<double>()});
    }
    world.identity_projection = mat_from_json(j.at("identity_projection"));
    return world;
}

nlohmann::json classifier_to_json(const ClassifierModel& model) {
    return {{"kind", "classifier"},
            {"depth", model.depth()},
            {"frozen", model.frozen()},
            {"layers", layers_to_json(model.layers())}};
}

ClassifierModel classifier_from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "classifier") {
        throw std::runtime_error("classifier_from_json: not a classifier document");
    }
    ClassifierModel model;
    model.layers() = layers_from_json(j.at("layers"));
    if (j.value("frozen", false)) model.freeze();
    return model;
}

nlohmann::json transformer_to_json(const TransformerModel& model) {
    nlohmann::json j{{"kind", "transformer"},
                     {"variant", to_string(model.variant())},
                     {"target_attribute", model.target_attribute()}};
    if (model.variant() == TransformerVariant::bias_only) {
        j["direction"] = model.bias_direction();
    } else {
        j["layers"] = layers_to_json(model.layers());
    }
    return j;
}

TransformerModel transformer_from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "transformer") {
        throw std::runtime_error("transformer_from_json: not a transformer document");
    }
    const auto variant = transformer_variant_from_string(j.at("variant").get<std::string>());
    const auto target = j.at("target_attribute").get<std::size_t>();
    if (variant == TransformerVariant::bias_only) {
        const Vec direction = j.at("direction").get<Vec>();
        auto model = make_transformer(variant, direction.size(), target);
        model.bias_direction() = direction;
        return model;
    }
    auto layers = layers_from_json(j.at("layers"));
    auto model = make_transformer(variant, layers.front().in_dim(), target, 0,
                                  variant == TransformerVariant::two_layer
                                      ? layers.front().out_dim()
                                      : 0);
    model.layers() = std::move(layers);
    return model;
}

void save_json(const nlohmann::json& j, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    return nlohmann::json::parse(in);
}

void write_dataset_csv(const LatentDataset& dataset, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (std::size_t a = 0; a < dataset.attribute_names.size(); ++a) {
        out << (a == 0 ? "" : ",") << dataset.attribute_names[a];
    }
    out << '\n';
    for (const auto& sample : dataset.samples) {
        for (std::size_t a = 0; a < sample.labels.size(); ++a) {
            out << (a == 0 ? "" : ",") << sample.labels[a];
        }
        for (double v : sample.code.values) out << ',' << format_double(v);
        out << '\n';
    }
}

LatentDataset read_dataset_csv(const std::filesystem::path& path, std::size_t layers,
                               std::size_t dim, double split_fraction,
                               std::uint64_t split_seed) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next_row(fields)) reader.fail("missing header row");
    LatentDataset dataset;
    dataset.attribute_names = fields;
    const std::size_t attrs = fields.size();
    const std::size_t flat = layers * dim;
    while (reader.next_row(fields)) {
        if (fields.size() != attrs + flat) {
            reader.fail("expected " + std::to_string(attrs + flat) + " fields, got " +
                        std::to_string(fields.size()));
        }
        LatentSample sample;
        sample.labels.reserve(attrs);
        for (std::size_t a = 0; a < attrs; ++a) {
            const auto v = reader.parse_index(fields[a]);
            if (v > 1) reader.fail("label must be 0 or 1");
            sample.labels.push_back(static_cast<int>(v));
        }
        sample.code = LatentCode(layers, dim);
        for (std::size_t i = 0; i < flat; ++i) {
            sample.code.values[i] = reader.parse_double(fields[attrs + i]);
        }
        dataset.samples.push_back(std::move(sample));
    }
    if (dataset.samples.empty()) reader.fail("dataset has no rows");
    make_split(dataset.samples.size(), split_fraction, split_seed, dataset.train_indices,
               dataset.test_indices);
    std::vector<std::vector<int>> train_labels;
    train_labels.reserve(dataset.train_indices.size());
    for (auto idx : dataset.train_indices) train_labels.push_back(dataset.samples[idx].labels);
    dataset.correlation = estimate_correlations(train_labels);
    return dataset;
}

void write_correlation_csv(const Mat& gamma, const std::vector<std::string>& names,
                           const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "attribute";
    for (const auto& name : names) out << ',' << name;
    out << '\n';
    for (std::size_t r = 0; r < gamma.rows; ++r) {
        out << names[r];
        for (std::size_t c = 0; c < gamma.cols; ++c) out << ',' << format_double(gamma(r, c));
        out << '\n';
    }
}

void write_metrics_csv(const ClassifierMetrics& metrics, const std::vector<std::string>& names,
                       const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "attribute,recall,specificity,precision,accuracy,f1\n";
    for (std::size_t a = 0; a < metrics.per_attribute.size(); ++a) {
        write_metrics_row(out, names[a], metrics.per_attribute[a]);
    }
    AttributeMetrics macro;
    macro.recall = metrics.recall;
    macro.specificity = metrics.specificity;
    macro.precision = metrics.precision;
    macro.f1 = metrics.f1;
    macro.accuracy = metrics.accuracy;
    write_metrics_row(out, "macro", macro);
}

void write_depth_table_csv(const std::vector<std::pair<int, ClassifierMetrics>>& table,
                           const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "depth,recall,specificity,precision,accuracy,f1\n";
    for (const auto& [depth, metrics] : table) {
        AttributeMetrics macro;
        macro.recall = metrics.recall;
        macro.specificity = metrics.specificity;
        macro.precision = metrics.precision;
        macro.f1 = metrics.f1;
        macro.accuracy = metrics.accuracy;
        write_metrics_row(out, std::to_string(depth), macro);
    }
}

void write_classifier_loss_csv(const ClassifierLossHistory& history,
                               const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "iteration,loss\n";
    for (const auto& [iter, loss] : history) {
        out << iter << ',' << format_double(loss) << '\n';
    }
}

void write_transformer_loss_csv(const TransformerLossHistory& history,
                                const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "iteration,l_cls,l_attr,l_rec,total\n";
    for (const auto& [iter, report] : history) {
        out << iter << ',' << format_double(report.l_cls) << ',' << format_double(report.l_attr)
            << ',' << format_double(report.l_rec) << ',' << format_double(report.total) << '\n';
    }
}

std::vector<EvalCsvRow> eval_rows(const std::vector<AttributeCurve>& curves,
                                  const std::vector<std::string>& names,
                                  const std::string& scenario) {
    std::vector<EvalCsvRow> rows;
    for (const auto& curve : curves) {
        for (const auto& point : curve.points) {
            rows.push_back({names[curve.attribute], point.factor, point.change_rate,
                            point.preservation_rate, point.identity_score, scenario});
        }
    }
    return rows;
}

void write_eval_csv(const std::vector<EvalCsvRow>& rows, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << kIdentityNote << '\n';
    out << "attribute,factor,change_rate,preservation_rate,identity_score,scenario\n";
    for (const auto& row : rows) {
        out << row.attribute << ',' << format_double(row.factor) << ','
            << format_double(row.change_rate) << ',' << format_double(row.preservation_rate)
            << ',' << format_double(row.identity_score) << ',' << row.scenario << '\n';
    }
}

nlohmann::json eval_summary_json(
    const std::vector<std::pair<std::string, std::vector<AttributeCurve>>>& per_scenario,
    const std::vector<std::string>& names) {
    nlohmann::json scenarios = nlohmann::json::object();
    for (const auto& [scenario, curves] : per_scenario) {
        nlohmann::json per_attr = nlohmann::json::object();
        for (const auto& curve : curves) {
            nlohmann::json arrays{{"factors", nlohmann::json::array()},
                                  {"change_rate", nlohmann::json::array()},
                                  {"preservation_rate", nlohmann::json::array()},
                                  {"identity_score", nlohmann::json::array()}};
            for (const auto& p : curve.points) {
                arrays["factors"].push_back(p.factor);
                arrays["change_rate"].push_back(p.change_rate);
                arrays["preservation_rate"].push_back(p.preservation_rate);
                arrays["identity_score"].push_back(p.identity_score);
            }
            per_attr[names[curve.attribute]] = std::move(arrays);
        }
        scenarios[scenario] = std::move(per_attr);
    }
    return {{"identity_embedding", "oracle linear projection (face-embedding stand-in)"},
            {"scenarios", scenarios}};
}

void write_track_csv(const LandmarkTrack& track, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "frame,point,x,y\n";
    for (std::size_t f = 0; f < track.frame_count; ++f) {
        for (std::size_t p = 0; p < track.point_count; ++p) {
            out << f << ',' << p << ',' << format_double(track.at(f, p, 0)) << ','
                << format_double(track.at(f, p, 1)) << '\n';
        }
    }
}

LandmarkTrack read_track_csv(const std::filesystem::path& path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next_row(fields) || fields.size() != 4 || fields[0] != "frame") {
        reader.fail("expected header 'frame,point,x,y'");
    }
    struct Row {
        std::size_t frame, point;
        double x, y;
    };
    std::vector<Row> rows;
    std::size_t max_frame = 0, max_point = 0;
    while (reader.next_row(fields)) {
        if (fields.size() != 4) reader.fail("expected 4 fields");
        Row row{reader.parse_index(fields[0]), reader.parse_index(fields[1]),
                reader.parse_double(fields[2]), reader.parse_double(fields[3])};
        max_frame = std::max(max_frame, row.frame);
        max_point = std::max(max_point, row.point);
        rows.push_back(row);
    }
    if (rows.empty()) reader.fail("track has no rows");
    LandmarkTrack track(max_frame + 1, max_point + 1);
    if (rows.size() != track.frame_count * track.point_count) {
        reader.fail("incomplete track: " + std::to_string(rows.size()) + " rows for " +
                    std::to_string(track.frame_count) + "x" + std::to_string(track.point_count) +
                    " grid");
    }
    for (const auto& row : rows) {
        track.at(row.frame, row.point, 0) = row.x;
        track.at(row.frame, row.point, 1) = row.y;
    }
    return track;
}

void write_sequence_csv(const LatentSequence& seq, const std::filesystem::path& path,
                        const std::vector<std::string>& comments) {
    auto out = open_out(path);
    for (const auto& comment : comments) out << "# " << comment << '\n';
    out << "frame\n";
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
        out << f;
        for (double v : seq.frames[f].values) out << ',' << format_double(v);
        out << '\n';
    }
}

LatentSequence read_sequence_csv(const std::filesystem::path& path, std::size_t layers,
                                 std::size_t dim) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next_row(fields) || fields.empty() || fields[0] != "frame") {
        reader.fail("expected header 'frame'");
    }
    const std::size_t flat = layers * dim;
    LatentSequence seq;
    while (reader.next_row(fields)) {
        if (fields.size() != flat + 1) {
            reader.fail("expected " + std::to_string(flat + 1) + " fields, got " +
                        std::to_string(fields.size()));
        }
        LatentCode code(layers, dim);
        for (std::size_t i = 0; i < flat; ++i) {
            code.values[i] = reader.parse_double(fields[i + 1]);
        }
        seq.frames.push_back(std::move(code));
    }
    if (seq.frames.empty()) reader.fail("sequence has no rows");
    return seq;
}

std::string file_hash_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": cannot open for hashing");
    std::uint64_t hash = 0xcbf29ce484222325ull;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ull;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

ArtifactManifest ArtifactManifest::load_or_create(const std::filesystem::path& manifest_path) {
    ArtifactManifest manifest;
    manifest.path_ = manifest_path;
    if (std::filesystem::exists(manifest_path)) {
        manifest.doc_ = load_json(manifest_path);
    } else {
        manifest.doc_ = {{"artifacts", nlohmann::json::object()},
                         {"notes", nlohmann::json::object()}};
    }
    return manifest;
}

void ArtifactManifest::record(const std::filesystem::path& artifact, const std::string& kind) {
    doc_["artifacts"][artifact.filename().string()] = {
        {"hash", file_hash_hex(artifact)}, {"kind", kind}, {"created", timestamp_utc()}};
}

void ArtifactManifest::verify(const std::filesystem::path& artifact) const {
    const std::string key = artifact.filename().string();
    const auto& artifacts = doc_.at("artifacts");
    if (!artifacts.contains(key)) {
        throw std::runtime_error("manifest: no entry for artifact '" + key +
                                 "'; regenerate it via the pipeline");
    }
    const std::string expected = artifacts.at(key).at("hash").get<std::string>();
    const std::string actual = file_hash_hex(artifact);
    if (expected != actual) {
        throw std::runtime_error("manifest: hash mismatch for '" + key + "': recorded " +
                                 expected + ", on disk " + actual);
    }
}

bool ArtifactManifest::has(const std::filesystem::path& artifact) const {
    return doc_.at("artifacts").contains(artifact.filename().string());
}

std::string ArtifactManifest::recorded_hash(const std::filesystem::path& artifact) const {
    return doc_.at("artifacts").at(artifact.filename().string()).at("hash").get<std::string>();
}

void ArtifactManifest::set_note(const std::string& key, const nlohmann::json& value) {
    doc_["notes"][key] = value;
}

void ArtifactManifest::save() const { save_json(doc_, path_); }

}  // namespace latent
