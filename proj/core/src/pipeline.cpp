#include "latent/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "latent/edit.hpp"
#include "latent/image_io.hpp"
#include "latent/persist.hpp"
#include "latent/rng.hpp"
#include "latent/video.hpp"

namespace latent {

namespace {

constexpr std::uint64_t kDataStream = 0x0Du;
constexpr std::uint64_t kClassifierStream = 0xC1u;
constexpr std::uint64_t kJudgeStream = 0x10D6Eu;
constexpr std::uint64_t kTransformerStream = 0x7100u;

void ensure_exists(const std::filesystem::path& path, const std::string& produced_by) {
    if (!std::filesystem::exists(path)) {
        throw std::runtime_error("missing prerequisite artifact '" + path.string() +
                                 "'; run `" + produced_by + "` first");
    }
}

void refuse_overwrite(const std::filesystem::path& path, bool force) {
    if (!force && std::filesystem::exists(path)) {
        throw std::runtime_error("refusing to overwrite '" + path.string() +
                                 "'; pass --force to allow it");
    }
}

ClassifierModel load_frozen_classifier(const PipelinePaths& paths,
                                       const std::filesystem::path& file) {
    auto manifest = ArtifactManifest::load_or_create(paths.manifest());
    manifest.verify(file);
    auto model = classifier_from_json(load_json(file));
    model.freeze();
    return model;
}

}  // namespace

nlohmann::json run_config_to_json(const RunConfig& c) {
    nlohmann::json spec = nlohmann::json::array();
    for (const auto& link : c.correlation_spec) {
        spec.push_back({link.first, link.second, link.shared_fraction});
    }
    return {{"seed", c.seed},
            {"world",
             {{"layers", c.layers},
              {"dim", c.dim},
              {"attrs", c.attrs},
              {"embed_dim", c.embed_dim},
              {"correlation_spec", spec}}},
            {"data", {{"samples", c.samples}, {"split_fraction", c.split_fraction}}},
            {"train",
             {{"classifier_iterations", c.classifier_iterations},
              {"transformer_iterations", c.transformer_iterations},
              {"batch_size", c.batch_size},
              {"lr", c.lr},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"lambda_attr", c.lambda_attr},
              {"lambda_rec", c.lambda_rec},
              {"classifier_depth", c.classifier_depth},
              {"hidden_width", c.hidden_width},
              {"judge_depth", c.judge_depth},
              {"judge_hidden_width", c.judge_hidden_width},
              {"variant", to_string(c.variant)},
              {"transformer_hidden_width", c.transformer_hidden_width},
              {"squared_norms", c.squared_norms},
              {"log_every", c.log_every}}},
            {"eval", {{"d", c.eval_d}, {"count", c.eval_count}}}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    c.seed = j.value("seed", c.seed);
    if (j.contains("world")) {
        const auto& w = j.at("world");
        c.layers = w.value("layers", c.layers);
        c.dim = w.value("dim", c.dim);
        c.attrs = w.value("attrs", c.attrs);
        c.embed_dim = w.value("embed_dim", c.embed_dim);
        if (w.contains("correlation_spec")) {
            c.correlation_spec.clear();
            for (const auto& link : w.at("correlation_spec")) {
                c.correlation_spec.push_back({link.at(0).get<std::size_t>(),
                                              link.at(1).get<std::size_t>(),
                                              link.at(2).get<double>()});
            }
        }
    }
    if (j.contains("data")) {
        const auto& d = j.at("data");
        c.samples = d.value("samples", c.samples);
        c.split_fraction = d.value("split_fraction", c.split_fraction);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        c.classifier_iterations = t.value("classifier_iterations", c.classifier_iterations);
        c.transformer_iterations = t.value("transformer_iterations", c.transformer_iterations);
        c.batch_size = t.value("batch_size", c.batch_size);
        c.lr = t.value("lr", c.lr);
        c.beta1 = t.value("beta1", c.beta1);
        c.beta2 = t.value("beta2", c.beta2);
        c.lambda_attr = t.value("lambda_attr", c.lambda_attr);
        c.lambda_rec = t.value("lambda_rec", c.lambda_rec);
        c.classifier_depth = t.value("classifier_depth", c.classifier_depth);
        c.hidden_width = t.value("hidden_width", c.hidden_width);
        c.judge_depth = t.value("judge_depth", c.judge_depth);
        c.judge_hidden_width = t.value("judge_hidden_width", c.judge_hidden_width);
        if (t.contains("variant")) {
            c.variant = transformer_variant_from_string(t.at("variant").get<std::string>());
        }
        c.transformer_hidden_width = t.value("transformer_hidden_width", c.transformer_hidden_width);
        c.squared_norms = t.value("squared_norms", c.squared_norms);
        c.log_every = t.value("log_every", c.log_every);
    }
    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        c.eval_d = e.value("d", c.eval_d);
        c.eval_count = e.value("count", c.eval_count);
    }
    require(c.lambda_attr >= 0.0 && c.lambda_rec >= 0.0, "config: lambdas must be >= 0");
    require(c.split_fraction > 0.0 && c.split_fraction < 1.0,
            "config: split_fraction outside (0,1)");
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return run_config_from_json(load_json(path));
}

std::uint64_t dataset_seed(const RunConfig& c) { return derive_seed(c.seed, kDataStream); }
std::uint64_t classifier_seed(const RunConfig& c) { return derive_seed(c.seed, kClassifierStream); }
std::uint64_t judge_seed(const RunConfig& c) { return derive_seed(c.seed, kJudgeStream); }
std::uint64_t transformer_seed(const RunConfig& c, std::size_t attribute) {
    return derive_seed(c.seed, kTransformerStream + attribute);
}

OracleWorld PipelineStore::load_world() const {
    ensure_exists(paths.world(), "gen-world");
    auto manifest = ArtifactManifest::load_or_create(paths.manifest());
    manifest.verify(paths.world());
    return world_from_json(load_json(paths.world()));
}

LatentDataset PipelineStore::load_dataset() const {
    ensure_exists(paths.dataset(), "gen-world");
    auto manifest = ArtifactManifest::load_or_create(paths.manifest());
    manifest.verify(paths.dataset());
    return read_dataset_csv(paths.dataset(), config.layers, config.dim, config.split_fraction,
                            dataset_seed(config));
}

ClassifierModel PipelineStore::load_classifier() const {
    ensure_exists(paths.classifier(), "train-classifier");
    return load_frozen_classifier(paths, paths.classifier());
}

ClassifierModel PipelineStore::load_judge() const {
    ensure_exists(paths.judge(), "train-judge");
    return load_frozen_classifier(paths, paths.judge());
}

TransformerModel PipelineStore::load_transformer(std::size_t attribute) const {
    ensure_exists(paths.transformer(attribute), "train-transformer");
    auto manifest = ArtifactManifest::load_or_create(paths.manifest());
    manifest.verify(paths.transformer(attribute));
    return transformer_from_json(load_json(paths.transformer(attribute)));
}

std::size_t PipelineStore::attribute_index(const std::string& name) const {
    for (std::size_t a = 0; a < config.attrs; ++a) {
        if (name == "attr_" + std::to_string(a)) return a;
    }
    std::ostringstream known;
    for (std::size_t a = 0; a < config.attrs; ++a) {
        known << (a == 0 ? "" : ", ") << "attr_" << a;
    }
    throw std::runtime_error("unknown attribute '" + name + "'; known attributes: " +
                             known.str());
}

void cmd_gen_world(const RunConfig& config, const std::filesystem::path& root,
                   std::ostream& log) {
    std::filesystem::create_directories(root);
    PipelinePaths paths{root};

    const auto world = make_world(config.seed, config.layers, config.dim, config.attrs,
                                  config.correlation_spec, config.embed_dim);
    const auto dataset =
        sample_dataset(world, config.samples, dataset_seed(config), config.split_fraction);

    save_json(world_to_json(world), paths.world());
    write_dataset_csv(dataset, paths.dataset());
    write_correlation_csv(dataset.correlation, dataset.attribute_names, paths.correlation());

    auto manifest = ArtifactManifest::load_or_create(paths.manifest());
    manifest.record(paths.world(), "world");
    manifest.record(paths.dataset(), "dataset");
    manifest.record(paths.correlation(), "correlation");
    manifest.set_note("train_rows", dataset.train_indices.size());
    manifest.set_note("test_rows", dataset.test_indices.size());
    manifest.save();

    log << "world: " << config.layers << "x" << config.dim << " latents, " << config.attrs
        << " attributes, seed " << config.seed << "\n";
    log << "dataset: " << dataset.samples.size() << " samples ("
        << dataset.train_indices.size() << " train, " << dataset.test_indices.size()
        << " test)\npositive rates:";
    for (std::size_t a = 0; a < config.attrs; ++a) {
        std::size_t positive = 0;
        for (const auto& sample : dataset.samples) positive += sample.labels[a];
        log << " " << dataset.attribute_names[a] << "="
            << static_cast<double>(positive) / static_cast<double>(dataset.samples.size());
    }
    log << "\n";
}

void cmd_train_classifier(const RunConfig& config, const std::filesystem::path& root,
                          TrainStage stage, bool force, std::ostream& log) {
    PipelinePaths paths{root};
    PipelineStore store{config, paths};
    const bool is_judge = stage == TrainStage::judge;
    const auto model_path = is_judge ? paths.judge() : paths.classifier();
    const auto loss_path = is_judge ? paths.judge_loss() : paths.classifier_loss();
    refuse_overwrite(model_path, force);

    const auto dataset = store.load_dataset();
    const std::size_t input_dim = config.layers * config.dim;
    const auto seed = is_judge ? judge_seed(config) : classifier_seed(config);

    auto model = build_classifier(is_judge ? config.judge_depth : config.classifier_depth,
                                  is_judge ? config.judge_hidden_width : config.hidden_width,
                                  input_dim, config.attrs, derive_seed(seed, 1));
    ClassifierTrainConfig train_config;
    train_config.iterations = config.classifier_iterations;
    train_config.batch_size = config.batch_size;
    train_config.lr = config.lr;
    train_config.beta1 = config.beta1;
    train_config.beta2 = config.beta2;
    train_config.seed = derive_seed(seed, 2);
    train_config.log_every = config.log_every;
    const auto history = train_classifier(model, dataset, train_config);

    save_json(classifier_to_json(model), model_path);
    write_classifier_loss_csv(history, loss_path);
    auto manifest = ArtifactManifest::load_or_create(paths.manifest());
    manifest.record(model_path, is_judge ? "judge" : "classifier");
    manifest.record(loss_path, "loss_log");
    manifest.save();

    const auto metrics = evaluate_classifier(model, dataset);
    log << (is_judge ? "judge" : "classifier") << ": depth "
        << (is_judge ? config.judge_depth : config.classifier_depth) << ", "
        << config.classifier_iterations << " iterations, held-out accuracy " << metrics.accuracy
        << "\n";
}

void cmd_train_transformer(const RunConfig& config, const std::filesystem::path& root,
                           std::vector<std::size_t> attributes, std::size_t jobs, bool force,
                           std::ostream& log) {
    PipelinePaths paths{root};
    PipelineStore store{config, paths};
    if (attributes.empty()) {
        for (std::size_t a = 0; a < config.attrs; ++a) attributes.push_back(a);
    }
    for (auto a : attributes) {
        require(a < config.attrs, "train-transformer: attribute index out of range");
        refuse_overwrite(paths.transformer(a), force);
    }

    const auto dataset = store.load_dataset();
    const auto classifier = store.load_classifier();

    struct Trained {
        std::size_t attribute;
        TransformerTrainResult result;
    };
    std::vector<Trained> outputs(attributes.size());
    std::mutex log_mutex;

    const auto train_one = [&](std::size_t slot) {
        const std::size_t k = attributes[slot];
        TransformerTrainConfig train_config;
        train_config.variant = config.variant;
        train_config.iterations = config.transformer_iterations;
        train_config.batch_size = config.batch_size;
        train_config.lr = config.lr;
        train_config.beta1 = config.beta1;
        train_config.beta2 = config.beta2;
        train_config.loss.lambda_attr = config.lambda_attr;
        train_config.loss.lambda_rec = config.lambda_rec;
        train_config.loss.squared_norms = config.squared_norms;
        train_config.seed = transformer_seed(config, k);
        train_config.log_every = config.log_every;
        train_config.hidden_width = config.transformer_hidden_width;
        Vec gamma_row(config.attrs);
        for (std::size_t i = 0; i < config.attrs; ++i) gamma_row[i] = dataset.correlation(k, i);
        outputs[slot] = {k, train_transformer(dataset, classifier, k, gamma_row, train_config)};
        std::lock_guard<std::mutex> lock(log_mutex);
        log << "transformer attr_" << k << ": " << config.transformer_iterations
            << " iterations, final total loss "
            << outputs[slot].result.history.back().second.total << "\n";
    };

    jobs = std::max<std::size_t>(1, jobs);
    for (std::size_t begin = 0; begin < attributes.size(); begin += jobs) {
        const std::size_t end = std::min(attributes.size(), begin + jobs);
        std::vector<std::thread> workers;
        for (std::size_t slot = begin; slot < end; ++slot) {
            workers.emplace_back(train_one, slot);
        }
        for (auto& worker : workers) worker.join();
    }

    auto manifest = ArtifactManifest::load_or_create(paths.manifest());
    for (const auto& trained : outputs) {
        save_json(transformer_to_json(trained.result.model), paths.transformer(trained.attribute));
        write_transformer_loss_csv(trained.result.history,
                                   paths.transformer_loss(trained.attribute));
        manifest.record(paths.transformer(trained.attribute), "transformer");
        manifest.record(paths.transformer_loss(trained.attribute), "loss_log");
    }
    manifest.save();
}

std::vector<EditScriptStep> parse_edit_script(const std::string& script) {
    std::vector<EditScriptStep> steps;
    std::istringstream in(script);
    std::string token;
    while (std::getline(in, token, ',')) {
        const auto first = token.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = token.find_last_not_of(" \t");
        token = token.substr(first, last - first + 1);
        const auto colon = token.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 >= token.size()) {
            throw std::runtime_error("edit script: expected 'attribute:alpha', got '" + token +
                                     "'");
        }
        EditScriptStep step;
        step.attribute = token.substr(0, colon);
        try {
            std::size_t used = 0;
            step.alpha = std::stod(token.substr(colon + 1), &used);
            if (used != token.size() - colon - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw std::runtime_error("edit script: bad alpha in '" + token + "'");
        }
        steps.push_back(std::move(step));
    }
    return steps;
}

void cmd_edit(const RunConfig& config, const std::filesystem::path& root,
              const std::filesystem::path& input_csv, const std::string& script,
              const std::filesystem::path& output_csv,
              const std::optional<std::filesystem::path>& intermediates_csv,
              bool fixed_displacement, std::ostream& log) {
    PipelinePaths paths{root};
    PipelineStore store{config, paths};
    const auto steps = parse_edit_script(script);

    std::vector<TransformerModel> models;
    models.reserve(steps.size());
    for (const auto& step : steps) {
        models.push_back(store.load_transformer(store.attribute_index(step.attribute)));
    }

    const auto input = read_sequence_csv(input_csv, config.layers, config.dim);
    if (intermediates_csv.has_value() && input.frames.size() != 1) {
        throw std::runtime_error("cmd_edit: --intermediates needs a single-row input (got " +
                                 std::to_string(input.frames.size()) + " rows)");
    }

    LatentSequence output;
    output.frames.reserve(input.frames.size());
    LatentSequence intermediates;
    for (const auto& frame : input.frames) {
        if (fixed_displacement) {
            // All step displacements are evaluated at the original code, so
            // alpha followed by -alpha cancels exactly.
            LatentCode current = frame;
            intermediates.frames.push_back(current);
            for (std::size_t s = 0; s < steps.size(); ++s) {
                current = edit_with_displacement(current, models[s].edit_direction(frame),
                                                 steps[s].alpha);
                intermediates.frames.push_back(current);
            }
            output.frames.push_back(current);
        } else {
            std::vector<EditStep> chain;
            chain.reserve(steps.size());
            for (std::size_t s = 0; s < steps.size(); ++s) {
                chain.push_back({&models[s], steps[s].alpha});
            }
            auto result = sequential_edit(frame, chain);
            output.frames.push_back(result.result());
            intermediates.frames = std::move(result.intermediates);
        }
    }

    std::vector<std::string> comments{"script: " + script};
    if (fixed_displacement) comments.push_back("mode: fixed-displacement");
    write_sequence_csv(output, output_csv, comments);
    if (intermediates_csv.has_value()) {
        comments.push_back("rows: source code followed by one row per step");
        write_sequence_csv(intermediates, *intermediates_csv, comments);
    }
    log << "edited " << input.frames.size() << " code(s) through " << steps.size()
        << " step(s) -> " << output_csv.string() << "\n";
}

void cmd_sweep(const RunConfig& config, const std::filesystem::path& root,
               const std::filesystem::path& input_csv, std::size_t row,
               const std::string& attribute, const std::filesystem::path& output_csv,
               std::ostream& log) {
    PipelinePaths paths{root};
    PipelineStore store{config, paths};
    const auto model = store.load_transformer(store.attribute_index(attribute));
    const auto input = read_sequence_csv(input_csv, config.layers, config.dim);
    require(row < input.frames.size(), "cmd_sweep: row index out of range");

    const auto result = sweep(input.frames[row], model, config.eval_d, config.eval_count);

    std::ofstream out(output_csv);
    if (!out) throw std::runtime_error(output_csv.string() + ": cannot open for writing");
    out << "# sweep of " << attribute << " at d=" << format_double(config.eval_d) << "\n";
    out << "factor\n";
    for (std::size_t i = 0; i < result.factors.size(); ++i) {
        out << format_double(result.factors[i]);
        for (double v : result.codes[i].values) out << ',' << format_double(v);
        out << '\n';
    }
    log << "swept " << attribute << " over " << result.factors.size() << " factors -> "
        << output_csv.string() << "\n";
}

bool cmd_eval(const RunConfig& config, const std::filesystem::path& root, std::ostream& log) {
    PipelinePaths paths{root};
    PipelineStore store{config, paths};
    const auto world = store.load_world();
    const auto dataset = store.load_dataset();
    const auto judge = store.load_judge();

    std::vector<TransformerModel> models;
    for (std::size_t a = 0; a < config.attrs; ++a) {
        if (std::filesystem::exists(paths.transformer(a))) {
            models.push_back(store.load_transformer(a));
        }
    }
    require(!models.empty(), "cmd_eval: no trained transformers found");

    std::vector<const TransformerModel*> model_ptrs;
    model_ptrs.reserve(models.size());
    for (const auto& model : models) model_ptrs.push_back(&model);

    const auto curves =
        run_eval(model_ptrs, dataset, judge, world, {config.eval_d, config.eval_count});

    bool in_bounds = true;
    for (const auto& curve : curves) {
        for (const auto& point : curve.points) {
            if (point.change_rate < 0.0 || point.change_rate > 1.0 ||
                point.preservation_rate < 0.0 || point.preservation_rate > 1.0 ||
                point.identity_score < -1.0 || point.identity_score > 1.0) {
                in_bounds = false;
            }
        }
    }

    write_eval_csv(eval_rows(curves, dataset.attribute_names, "full"), paths.eval_csv());
    save_json(eval_summary_json({{"full", curves}}, dataset.attribute_names),
              paths.eval_summary());
    auto manifest = ArtifactManifest::load_or_create(paths.manifest());
    manifest.record(paths.eval_csv(), "eval_report");
    manifest.record(paths.eval_summary(), "eval_report");
    manifest.save();

    for (const auto& curve : curves) {
        const auto& last = curve.points.back();
        log << "attr_" << curve.attribute << " @factor " << last.factor << ": change "
            << last.change_rate << ", preservation " << last.preservation_rate << ", identity "
            << last.identity_score << "\n";
    }
    if (!in_bounds) log << "WARNING: metric bounds violated\n";
    return in_bounds;
}

void cmd_ablate(const RunConfig& config, const std::filesystem::path& root,
                const std::string& attribute, std::ostream& log) {
    PipelinePaths paths{root};
    PipelineStore store{config, paths};
    const std::size_t k = store.attribute_index(attribute);
    const auto world = store.load_world();
    const auto dataset = store.load_dataset();
    const auto classifier = store.load_classifier();
    const auto judge = store.load_judge();

    TransformerTrainConfig base;
    base.variant = config.variant;
    base.iterations = config.transformer_iterations;
    base.batch_size = config.batch_size;
    base.lr = config.lr;
    base.beta1 = config.beta1;
    base.beta2 = config.beta2;
    base.loss.lambda_attr = config.lambda_attr;
    base.loss.lambda_rec = config.lambda_rec;
    base.loss.squared_norms = config.squared_norms;
    base.seed = transformer_seed(config, k);
    base.log_every = config.log_every;
    base.hidden_width = config.transformer_hidden_width;

    Vec gamma_row(config.attrs);
    for (std::size_t i = 0; i < config.attrs; ++i) gamma_row[i] = dataset.correlation(k, i);

    const auto results = run_ablation(
        dataset, classifier, k, gamma_row,
        standard_ablation_scenarios(config.lambda_attr, config.lambda_rec), base, judge, world,
        {config.eval_d, config.eval_count});

    std::vector<EvalCsvRow> rows;
    std::vector<std::pair<std::string, std::vector<AttributeCurve>>> per_scenario;
    nlohmann::json matched = nlohmann::json::object();
    for (const auto& result : results) {
        AttributeCurve curve{k, result.points};
        auto scenario_rows = eval_rows({curve}, dataset.attribute_names, result.scenario.name);
        rows.insert(rows.end(), scenario_rows.begin(), scenario_rows.end());
        per_scenario.emplace_back(result.scenario.name, std::vector<AttributeCurve>{curve});

        const auto at80 = interpolate_at_change(result.points, 0.8);
        matched[result.scenario.name] = {{"reached", at80.reached},
                                         {"factor", at80.factor},
                                         {"preservation_rate", at80.preservation_rate},
                                         {"identity_score", at80.identity_score}};
        log << result.scenario.name << " (lambda_attr=" << result.scenario.lambda_attr
            << ", lambda_rec=" << result.scenario.lambda_rec << ")";
        if (at80.reached) {
            log << " @change=0.8: preservation " << at80.preservation_rate << ", identity "
                << at80.identity_score << "\n";
        } else {
            log << ": change rate never reached 0.8\n";
        }
    }

    write_eval_csv(rows, paths.ablation_csv(k));
    auto summary = eval_summary_json(per_scenario, dataset.attribute_names);
    summary["matched_change_rate_0.8"] = matched;
    save_json(summary, paths.ablation_summary(k));
    auto manifest = ArtifactManifest::load_or_create(paths.manifest());
    manifest.record(paths.ablation_csv(k), "ablation_report");
    manifest.record(paths.ablation_summary(k), "ablation_report");
    manifest.save();
}

void cmd_smooth(const std::filesystem::path& track_csv, double sigma,
                const std::filesystem::path& output_csv, std::ostream& log) {
    const auto track = read_track_csv(track_csv);
    const auto smoothed = gaussian_smooth_track(track, sigma);
    write_track_csv(smoothed, output_csv);
    log << "smoothed " << track.frame_count << " frames x " << track.point_count
        << " points with sigma " << sigma << " -> " << output_csv.string() << "\n";
}

void cmd_blend(const std::filesystem::path& source_ppm, const std::filesystem::path& target_ppm,
               const std::filesystem::path& mask_pgm, const std::filesystem::path& output_ppm,
               std::ostream& log) {
    const auto source = read_ppm(source_ppm);
    const auto target = read_ppm(target_ppm);
    const auto mask = read_pgm_mask(mask_pgm);
    const auto blended = poisson_blend(source, target, mask);
    write_ppm(blended, output_ppm);
    log << "blended " << mask.count() << " masked pixel(s) -> " << output_ppm.string() << "\n";
}

}  // namespace latent
