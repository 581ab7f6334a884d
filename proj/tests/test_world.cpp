#include <doctest.h>

#include <cmath>

#include "latent/rng.hpp"
#include "latent/world.hpp"

using namespace latent;

TEST_CASE("make_world is deterministic in the seed") {
    const auto a = make_world(123, 4, 32, 8, {{0, 1, 0.5}});
    const auto b = make_world(123, 4, 32, 8, {{0, 1, 0.5}});
    CHECK(a.attribute_directions.data == b.attribute_directions.data);
    CHECK(a.identity_projection.data == b.identity_projection.data);
    const auto c = make_world(124, 4, 32, 8, {{0, 1, 0.5}});
    CHECK(a.attribute_directions.data != c.attribute_directions.data);
}

TEST_CASE("make_world rows are unit norm") {
    const auto world = make_world(5, 2, 16, 6, {{2, 3, 0.7}});
    for (std::size_t a = 0; a < world.attrs; ++a) {
        double norm = 0.0;
        for (std::size_t c = 0; c < world.flat_dim(); ++c) {
            norm += world.attribute_directions(a, c) * world.attribute_directions(a, c);
        }
        CHECK(std::fabs(std::sqrt(norm) - 1.0) < 1e-12);
    }
    for (std::size_t e = 0; e < world.embed_dim; ++e) {
        double norm = 0.0;
        for (std::size_t c = 0; c < world.flat_dim(); ++c) {
            norm += world.identity_projection(e, c) * world.identity_projection(e, c);
        }
        CHECK(std::fabs(std::sqrt(norm) - 1.0) < 1e-12);
    }
}

TEST_CASE("make_world rejects bad correlation specs") {
    CHECK_THROWS_AS(make_world(1, 2, 4, 3, {{0, 9, 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(make_world(1, 2, 4, 3, {{1, 1, 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(make_world(1, 2, 4, 3, {{0, 1, 1.5}}), std::invalid_argument);
}

TEST_CASE("fully shared direction gives identical or complementary labels") {
    const auto world = make_world(9, 4, 32, 4, {{0, 1, 1.0}});
    const auto dataset = sample_dataset(world, 500, 11);
    bool all_equal = true;
    bool all_opposite = true;
    for (const auto& sample : dataset.samples) {
        if (sample.labels[0] != sample.labels[1]) all_equal = false;
        if (sample.labels[0] == sample.labels[1]) all_opposite = false;
    }
    CHECK((all_equal || all_opposite));
    CHECK(std::fabs(dataset.correlation(0, 1) - 1.0) < 1e-12);
}

TEST_CASE("uncorrelated world has small empirical label correlations") {
    const auto world = make_world(3, 4, 32, 8, {});
    const auto dataset = sample_dataset(world, 10000, 17);
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 8; ++j) {
            if (i != j) CHECK(dataset.correlation(i, j) < 0.1);
        }
    }
}

TEST_CASE("oracle_label boundary convention: zero code maps to all-zero labels") {
    const auto world = make_world(21, 4, 32, 8, {});
    const auto labels = oracle_label(world, LatentCode(4, 32));
    for (int label : labels) CHECK(label == 0);
}

TEST_CASE("oracle_label detects a strong push along an attribute direction") {
    const auto world = make_world(33, 4, 32, 4, {});
    LatentCode code(4, 32);
    for (std::size_t c = 0; c < world.flat_dim(); ++c) {
        code.values[c] = 10.0 * world.attribute_directions(0, c);
    }
    CHECK(oracle_label(world, code)[0] == 1);
}

TEST_CASE("oracle_label depends only on the flattened values") {
    const auto world = make_world(4, 4, 32, 4, {});
    Rng rng(5);
    const Vec values = rng.gaussian_vec(128);
    const LatentCode layered(4, 32, values);
    const LatentCode flat(1, 128, values);
    CHECK(oracle_label(world, layered) == oracle_label(world, flat));
    CHECK_THROWS_AS(oracle_label(world, LatentCode(4, 16)), std::invalid_argument);
}

TEST_CASE("sample_dataset splits 90/10 and is deterministic") {
    const auto world = make_world(7, 2, 16, 4, {});
    const auto a = sample_dataset(world, 100, 42);
    CHECK(a.train_indices.size() == 90);
    CHECK(a.test_indices.size() == 10);

    const auto b = sample_dataset(world, 100, 42);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].code.values == b.samples[i].code.values);
        CHECK(a.samples[i].labels == b.samples[i].labels);
    }
    CHECK(a.train_indices == b.train_indices);
    CHECK(a.correlation.data == b.correlation.data);

    // splits disjoint and exhaustive
    std::vector<bool> seen(100, false);
    for (auto idx : a.train_indices) seen[idx] = true;
    for (auto idx : a.test_indices) {
        CHECK(!seen[idx]);
        seen[idx] = true;
    }
    for (bool s : seen) CHECK(s);
}

TEST_CASE("labels are a deterministic function of the code") {
    const auto world = make_world(13, 2, 16, 4, {});
    const auto dataset = sample_dataset(world, 50, 3);
    for (const auto& sample : dataset.samples) {
        CHECK(sample.labels == oracle_label(world, sample.code));
    }
}

TEST_CASE("world is approximately balanced") {
    const auto world = make_world(29, 4, 32, 8, {});
    const auto dataset = sample_dataset(world, 2000, 31);
    for (std::size_t a = 0; a < 8; ++a) {
        std::size_t positive = 0;
        for (const auto& sample : dataset.samples) positive += sample.labels[a];
        const double rate = static_cast<double>(positive) / 2000.0;
        CHECK(rate >= 0.35);
        CHECK(rate <= 0.65);
    }
}

TEST_CASE("estimate_correlations worked values") {
    SUBCASE("identical columns") {
        const auto gamma = estimate_correlations({{0, 0}, {0, 0}, {1, 1}, {1, 1}});
        CHECK(gamma(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("complementary columns") {
        const auto gamma = estimate_correlations({{0, 1}, {0, 1}, {1, 0}, {1, 0}});
        CHECK(gamma(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("orthogonal columns") {
        const auto gamma = estimate_correlations({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
        CHECK(gamma(0, 1) == 0.0);
    }
    SUBCASE("zero-variance column") {
        const auto gamma = estimate_correlations({{0, 1}, {0, 1}, {0, 0}, {0, 1}});
        CHECK(gamma(0, 0) == 1.0);
        CHECK(gamma(0, 1) == 0.0);
        CHECK(gamma(1, 0) == 0.0);
    }
}

TEST_CASE("gamma is symmetric with unit diagonal and entries in [0,1]") {
    const auto world = make_world(37, 2, 16, 6, {{0, 1, 0.9}, {2, 3, 0.5}});
    const auto dataset = sample_dataset(world, 800, 23);
    const auto& gamma = dataset.correlation;
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(gamma(i, i) == 1.0);
        for (std::size_t j = 0; j < 6; ++j) {
            CHECK(gamma(i, j) == gamma(j, i));
            CHECK(gamma(i, j) >= 0.0);
            CHECK(gamma(i, j) <= 1.0);
        }
    }
}

TEST_CASE("identity_embed is a linear map with exact cosine behavior") {
    const auto world = make_world(41, 2, 16, 4, {});
    Rng rng(6);
    LatentCode code(2, 16, rng.gaussian_vec(32));

    const Vec e = identity_embed(world, code);
    const auto cosine = [](const Vec& a, const Vec& b) {
        return dot(a, b) / (std::sqrt(dot(a, a)) * std::sqrt(dot(b, b)));
    };
    CHECK(cosine(e, e) == doctest::Approx(1.0).epsilon(1e-12));

    LatentCode negated = code;
    for (auto& v : negated.values) v = -v;
    CHECK(cosine(e, identity_embed(world, negated)) == doctest::Approx(-1.0).epsilon(1e-12));

    LatentCode doubled = code;
    for (auto& v : doubled.values) v *= 2.0;
    const Vec e2 = identity_embed(world, doubled);
    for (std::size_t i = 0; i < e.size(); ++i) {
        CHECK(e2[i] == doctest::Approx(2.0 * e[i]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(identity_embed(world, LatentCode(1, 3)), std::invalid_argument);
}
