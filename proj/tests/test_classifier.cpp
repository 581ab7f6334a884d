#include <doctest.h>

#include <cmath>

#include "latent/classifier.hpp"
#include "latent/rng.hpp"

using namespace latent;

namespace {

/// Dataset of n copies of one labeled sample; everything lands in the train
/// split except the last copy.
LatentDataset identical_sample_dataset(std::size_t n, const LatentCode& code,
                                       const std::vector<int>& labels) {
    LatentDataset dataset;
    for (std::size_t i = 0; i < n; ++i) dataset.samples.push_back({code, labels});
    for (std::size_t a = 0; a < labels.size(); ++a) {
        dataset.attribute_names.push_back("attr_" + std::to_string(a));
    }
    for (std::size_t i = 0; i + 1 < n; ++i) dataset.train_indices.push_back(i);
    dataset.test_indices.push_back(n - 1);
    dataset.correlation = Mat(labels.size(), labels.size());
    for (std::size_t a = 0; a < labels.size(); ++a) dataset.correlation(a, a) = 1.0;
    return dataset;
}

/// Thresholding model: predicts attribute a from the sign of coordinate a.
ClassifierModel sign_judge(std::size_t dims, std::size_t attrs) {
    auto model = build_classifier(1, 4, dims, attrs, 0);
    for (auto& w : model.layers()[0].weights.data) w = 0.0;
    for (std::size_t a = 0; a < attrs; ++a) model.layers()[0].weights(a, a) = 100.0;
    model.freeze();
    return model;
}

}  // namespace

TEST_CASE("build_classifier layer counts and shapes") {
    const auto three = build_classifier(3, 64, 128, 8, 1);
    CHECK(three.depth() == 3);
    CHECK(three.layers()[0].in_dim() == 128);
    CHECK(three.layers()[0].out_dim() == 64);
    CHECK(three.layers()[2].out_dim() == 8);

    const auto one = build_classifier(1, 64, 128, 8, 1);
    CHECK(one.depth() == 1);
    CHECK(one.layers()[0].in_dim() == 128);
    CHECK(one.layers()[0].out_dim() == 8);

    CHECK_THROWS_AS(build_classifier(0, 64, 128, 8, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_classifier(5, 64, 128, 8, 1), std::invalid_argument);
}

TEST_CASE("build_classifier is seed deterministic") {
    const auto a = build_classifier(3, 32, 64, 4, 99);
    const auto b = build_classifier(3, 32, 64, 4, 99);
    const auto c = build_classifier(3, 32, 64, 4, 100);
    for (int l = 0; l < 3; ++l) {
        CHECK(a.layers()[l].weights.data == b.layers()[l].weights.data);
    }
    CHECK(a.layers()[0].weights.data != c.layers()[0].weights.data);
}

TEST_CASE("predict returns 0.5 everywhere for an all-zero model") {
    auto model = build_classifier(2, 16, 8, 3, 1);
    for (auto& layer : model.layers()) {
        for (auto& w : layer.weights.data) w = 0.0;
    }
    const Vec probs = model.predict(LatentCode(1, 8));
    for (double p : probs) CHECK(p == 0.5);
}

TEST_CASE("predict stays strictly inside (0,1) and is deterministic") {
    const auto model = build_classifier(3, 32, 16, 4, 7);
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const LatentCode code(2, 8, rng.gaussian_vec(16));
        const Vec p1 = model.predict(code);
        const Vec p2 = model.predict(code);
        CHECK(p1 == p2);
        for (double p : p1) {
            CHECK(p > 0.0);
            CHECK(p < 1.0);
        }
    }
    CHECK_THROWS_AS(model.predict(LatentCode(2, 4)), std::invalid_argument);
}

TEST_CASE("train_classifier with 0 iterations leaves the model at initialization") {
    auto model = build_classifier(2, 16, 8, 2, 5);
    const auto before = model.layers();
    const auto dataset = identical_sample_dataset(12, LatentCode(1, 8), {1, 0});
    ClassifierTrainConfig config;
    config.iterations = 0;
    const auto history = train_classifier(model, dataset, config);
    CHECK(history.empty());
    CHECK(model.frozen());
    for (int l = 0; l < 2; ++l) {
        CHECK(model.layers()[l].weights.data == before[l].weights.data);
        CHECK(model.layers()[l].bias == before[l].bias);
    }
}

TEST_CASE("training defaults match the reference hyperparameters") {
    const ClassifierTrainConfig config;
    CHECK(config.batch_size == 32);
    CHECK(config.lr == 0.001);
    CHECK(config.beta1 == 0.9);
    CHECK(config.beta2 == 0.999);
}

TEST_CASE("train_classifier fits a single repeated sample") {
    Rng rng(11);
    const LatentCode code(1, 8, rng.gaussian_vec(8));
    const std::vector<int> labels{1, 0, 1};
    const auto dataset = identical_sample_dataset(16, code, labels);

    auto model = build_classifier(2, 16, 8, 3, 2);
    ClassifierTrainConfig config;
    config.iterations = 1000;
    config.seed = 4;
    train_classifier(model, dataset, config);

    const Vec probs = model.predict(code);
    for (std::size_t a = 0; a < labels.size(); ++a) {
        CHECK(nn::bce_loss(probs[a], labels[a]) < 0.05);
    }
}

TEST_CASE("training loss history is sampled every log_every iterations") {
    const auto dataset = identical_sample_dataset(12, LatentCode(1, 8), {1, 0});
    auto model = build_classifier(1, 8, 8, 2, 3);
    ClassifierTrainConfig config;
    config.iterations = 40;
    config.log_every = 10;
    const auto history = train_classifier(model, dataset, config);
    CHECK(history.size() == 4);
    CHECK(history.front().first == 0);
    CHECK(history.back().first == 30);
}

TEST_CASE("evaluate_classifier perfect predictor scores 1.0 everywhere") {
    LatentDataset dataset;
    dataset.attribute_names = {"attr_0", "attr_1"};
    Rng rng(8);
    for (std::size_t i = 0; i < 40; ++i) {
        LatentCode code(1, 2, rng.gaussian_vec(2));
        std::vector<int> labels{code.values[0] > 0.0 ? 1 : 0, code.values[1] > 0.0 ? 1 : 0};
        dataset.samples.push_back({std::move(code), std::move(labels)});
        dataset.test_indices.push_back(i);
    }
    const auto metrics = evaluate_classifier(sign_judge(2, 2), dataset);
    CHECK(metrics.accuracy == 1.0);
    CHECK(metrics.recall.value() == 1.0);
    CHECK(metrics.specificity.value() == 1.0);
    CHECK(metrics.precision.value() == 1.0);
    CHECK(metrics.f1.value() == 1.0);
}

TEST_CASE("all-positive predictor: recall 1, specificity 0") {
    LatentDataset dataset;
    dataset.attribute_names = {"attr_0"};
    Rng rng(9);
    for (std::size_t i = 0; i < 20; ++i) {
        LatentCode code(1, 2, rng.gaussian_vec(2));
        dataset.samples.push_back({std::move(code), {i % 2 == 0 ? 1 : 0}});
        dataset.test_indices.push_back(i);
    }
    auto model = build_classifier(1, 4, 2, 1, 0);
    for (auto& w : model.layers()[0].weights.data) w = 0.0;
    model.layers()[0].bias[0] = 50.0;
    model.freeze();
    const auto metrics = evaluate_classifier(model, dataset);
    CHECK(metrics.recall.value() == 1.0);
    CHECK(metrics.specificity.value() == 0.0);
    CHECK(metrics.accuracy == 0.5);
}

TEST_CASE("confusion-matrix arithmetic on a crafted split") {
    // Predicted positive iff x0 > 0. Counts: TP=3 FP=1 FN=1 TN=5.
    LatentDataset dataset;
    dataset.attribute_names = {"attr_0"};
    const auto add = [&](double x0, int label) {
        dataset.test_indices.push_back(dataset.samples.size());
        dataset.samples.push_back({LatentCode(1, 1, {x0}), {label}});
    };
    for (int i = 0; i < 3; ++i) add(1.0, 1);   // TP
    add(1.0, 0);                               // FP
    add(-1.0, 1);                              // FN
    for (int i = 0; i < 5; ++i) add(-1.0, 0);  // TN

    const auto metrics = evaluate_classifier(sign_judge(1, 1), dataset);
    const auto& m = metrics.per_attribute[0];
    CHECK(m.tp == 3);
    CHECK(m.fp == 1);
    CHECK(m.fn == 1);
    CHECK(m.tn == 5);
    CHECK(m.precision.value() == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(m.recall.value() == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(m.accuracy == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(m.f1.value() == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(m.specificity.value() == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("undefined ratios are excluded from macro averages") {
    // Attribute 1 has no positive test labels, so its recall is undefined;
    // with an all-negative predictor its precision is undefined too.
    LatentDataset dataset;
    dataset.attribute_names = {"attr_0", "attr_1"};
    const auto add = [&](double x0, int l0) {
        dataset.test_indices.push_back(dataset.samples.size());
        dataset.samples.push_back({LatentCode(1, 2, {x0, -1.0}), {l0, 0}});
    };
    add(1.0, 1);
    add(-1.0, 0);
    add(1.0, 1);
    add(-1.0, 0);

    const auto metrics = evaluate_classifier(sign_judge(2, 2), dataset);
    CHECK(!metrics.per_attribute[1].recall.has_value());
    CHECK(!metrics.per_attribute[1].precision.has_value());
    CHECK(!metrics.per_attribute[1].f1.has_value());
    // Macro averages fall back to attribute 0 alone.
    CHECK(metrics.recall.value() == 1.0);
    CHECK(metrics.precision.value() == 1.0);
    CHECK(metrics.f1.value() == 1.0);
}

TEST_CASE("metric identities hold on a trained model") {
    const auto world = make_world(55, 2, 8, 4, {});
    const auto dataset = sample_dataset(world, 300, 5);
    auto model = build_classifier(2, 24, 16, 4, 6);
    ClassifierTrainConfig config;
    config.iterations = 300;
    config.seed = 7;
    train_classifier(model, dataset, config);

    const auto metrics = evaluate_classifier(model, dataset);
    for (const auto& m : metrics.per_attribute) {
        const std::size_t total = m.tp + m.fp + m.fn + m.tn;
        CHECK(total == dataset.test_indices.size());
        CHECK(m.accuracy ==
              doctest::Approx(static_cast<double>(m.tp + m.tn) / static_cast<double>(total))
                  .epsilon(1e-12));
        if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0) {
            CHECK(m.f1.value() ==
                  doctest::Approx(2.0 * *m.precision * *m.recall / (*m.precision + *m.recall))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("classifier_depth_table trains and reports all requested depths") {
    const auto world = make_world(60, 2, 8, 3, {});
    const auto dataset = sample_dataset(world, 200, 8);
    ClassifierTrainConfig config;
    config.iterations = 120;
    config.seed = 9;
    const auto table = classifier_depth_table(dataset, 16, config);
    REQUIRE(table.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(table[i].first == static_cast<int>(i + 1));
        CHECK(table[i].second.accuracy >= 0.0);
        CHECK(table[i].second.accuracy <= 1.0);
    }
}
