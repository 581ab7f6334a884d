// Command-line entry point for the latent editing pipeline:
// gen-world -> train-classifier / train-judge -> train-transformer ->
// edit / sweep -> eval / ablate, plus the video helpers smooth and blend.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latent/pipeline.hpp"

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string artifact_root;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> iterations;
    std::optional<std::size_t> samples;
    std::optional<double> lambda_attr;
    std::optional<double> lambda_rec;
    std::optional<std::string> variant;
    std::optional<double> eval_d;
    std::optional<std::size_t> eval_count;
};

/// Flags win over config-file values; the artifact root falls back to
/// LATENTEDIT_ARTIFACTS and then to ./artifacts.
latent::RunConfig resolve_config(const GlobalOptions& options) {
    latent::RunConfig config;
    if (!options.config_path.empty()) {
        config = latent::load_run_config(options.config_path);
    }
    if (options.seed) config.seed = *options.seed;
    if (options.samples) config.samples = *options.samples;
    if (options.lambda_attr) config.lambda_attr = *options.lambda_attr;
    if (options.lambda_rec) config.lambda_rec = *options.lambda_rec;
    if (options.variant) config.variant = latent::transformer_variant_from_string(*options.variant);
    if (options.eval_d) config.eval_d = *options.eval_d;
    if (options.eval_count) config.eval_count = *options.eval_count;
    return config;
}

std::filesystem::path resolve_root(const GlobalOptions& options) {
    if (!options.artifact_root.empty()) return options.artifact_root;
    if (const char* env = std::getenv("LATENTEDIT_ARTIFACTS"); env != nullptr && *env != '\0') {
        return env;
    }
    return "artifacts";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Disentangled latent attribute editing pipeline"};
    app.require_subcommand(1);

    GlobalOptions options;
    app.add_option("--config", options.config_path, "JSON run configuration file");
    app.add_option("--artifacts", options.artifact_root,
                   "Artifact root directory (overrides LATENTEDIT_ARTIFACTS)");
    app.add_option("--seed", options.seed, "Master seed override");

    auto* gen = app.add_subcommand("gen-world", "Generate oracle world, dataset and correlations");
    gen->add_option("--samples", options.samples, "Dataset size override");

    bool force = false;
    auto* train_cls = app.add_subcommand("train-classifier", "Train the loss classifier");
    auto* train_judge = app.add_subcommand("train-judge", "Train the independent judge");
    auto* train_tr = app.add_subcommand("train-transformer", "Train per-attribute transformers");
    for (auto* cmd : {train_cls, train_judge, train_tr}) {
        cmd->add_flag("--force", force, "Overwrite existing model artifacts");
        cmd->add_option("--iterations", options.iterations, "Training iterations override");
    }
    std::vector<std::string> train_attributes;
    std::size_t jobs = 1;
    train_tr->add_option("--attribute", train_attributes,
                         "Attribute name(s) to train (default: all)");
    train_tr->add_option("--jobs", jobs, "Concurrent transformer trainings");
    train_tr->add_option("--lambda-attr", options.lambda_attr, "Attribute loss weight");
    train_tr->add_option("--lambda-rec", options.lambda_rec, "Reconstruction loss weight");
    train_tr->add_option("--variant", options.variant,
                         "Transformer variant: linear | two_layer | bias_only");

    auto* edit = app.add_subcommand("edit", "Apply an edit script to latent codes");
    std::string edit_input, edit_script, edit_output, edit_intermediates;
    bool fixed_displacement = false;
    edit->add_option("--input", edit_input, "Input latent sequence CSV")->required();
    edit->add_option("--script", edit_script, "Comma-separated attribute:alpha steps")->required();
    edit->add_option("--out", edit_output, "Output CSV")->required();
    edit->add_option("--intermediates", edit_intermediates,
                     "Write per-step intermediate codes (single-row input only)");
    edit->add_flag("--fixed-displacement", fixed_displacement,
                   "Evaluate displacements at the original code (exact undo)");

    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one attribute over the scaling factors");
    std::string sweep_input, sweep_attribute, sweep_output;
    std::size_t sweep_row = 0;
    sweep_cmd->add_option("--input", sweep_input, "Input latent sequence CSV")->required();
    sweep_cmd->add_option("--row", sweep_row, "Input row to sweep");
    sweep_cmd->add_option("--attribute", sweep_attribute, "Attribute name")->required();
    sweep_cmd->add_option("--out", sweep_output, "Output CSV")->required();
    sweep_cmd->add_option("--d", options.eval_d, "Suggested magnitude d");
    sweep_cmd->add_option("--count", options.eval_count, "Number of factors");

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate trained transformers on the test split");
    eval_cmd->add_option("--d", options.eval_d, "Suggested magnitude d");
    eval_cmd->add_option("--count", options.eval_count, "Number of factors");

    auto* ablate = app.add_subcommand("ablate", "Loss-composition ablation for one attribute");
    std::string ablate_attribute;
    ablate->add_option("--attribute", ablate_attribute, "Attribute name")->required();
    ablate->add_option("--iterations", options.iterations, "Training iterations override");

    auto* smooth = app.add_subcommand("smooth", "Gaussian-smooth a landmark track");
    std::string smooth_input, smooth_output;
    double sigma = 1.0;
    smooth->add_option("--input", smooth_input, "Input track CSV")->required();
    smooth->add_option("--sigma", sigma, "Gaussian sigma in frames")->required();
    smooth->add_option("--out", smooth_output, "Output track CSV")->required();

    auto* blend = app.add_subcommand("blend", "Poisson seamless cloning");
    std::string blend_source, blend_target, blend_mask, blend_output;
    blend->add_option("source", blend_source, "Source PPM (P6)")->required();
    blend->add_option("target", blend_target, "Target PPM (P6)")->required();
    blend->add_option("mask", blend_mask, "Mask PGM (P5, 255 = inside)")->required();
    blend->add_option("out", blend_output, "Output PPM")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        auto config = resolve_config(options);
        const auto root = resolve_root(options);

        if (gen->parsed()) {
            latent::cmd_gen_world(config, root, std::cout);
        } else if (train_cls->parsed() || train_judge->parsed()) {
            if (options.iterations) config.classifier_iterations = *options.iterations;
            latent::cmd_train_classifier(config, root,
                                         train_judge->parsed() ? latent::TrainStage::judge
                                                               : latent::TrainStage::classifier,
                                         force, std::cout);
        } else if (train_tr->parsed()) {
            if (options.iterations) config.transformer_iterations = *options.iterations;
            latent::PipelineStore store{config, latent::PipelinePaths{root}};
            std::vector<std::size_t> indices;
            for (const auto& name : train_attributes) {
                indices.push_back(store.attribute_index(name));
            }
            latent::cmd_train_transformer(config, root, indices, jobs, force, std::cout);
        } else if (edit->parsed()) {
            std::optional<std::filesystem::path> intermediates;
            if (!edit_intermediates.empty()) intermediates = edit_intermediates;
            latent::cmd_edit(config, root, edit_input, edit_script, edit_output, intermediates,
                             fixed_displacement, std::cout);
        } else if (sweep_cmd->parsed()) {
            latent::cmd_sweep(config, root, sweep_input, sweep_row, sweep_attribute, sweep_output,
                              std::cout);
        } else if (eval_cmd->parsed()) {
            if (!latent::cmd_eval(config, root, std::cout)) {
                std::cerr << "eval: metric invariant violated\n";
                return 2;
            }
        } else if (ablate->parsed()) {
            if (options.iterations) config.transformer_iterations = *options.iterations;
            latent::cmd_ablate(config, root, ablate_attribute, std::cout);
        } else if (smooth->parsed()) {
            latent::cmd_smooth(smooth_input, sigma, smooth_output, std::cout);
        } else if (blend->parsed()) {
            latent::cmd_blend(blend_source, blend_target, blend_mask, blend_output, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
