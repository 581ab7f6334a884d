#include "latent/world.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "latent/nn.hpp"
#include "latent/rng.hpp"

namespace latent {

namespace {

void normalize_row(Mat& m, std::size_t row) {
    double norm = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) norm += m(row, c) * m(row, c);
    norm = std::sqrt(norm);
    require(norm > 0.0, "normalize_row: zero-norm direction");
    for (std::size_t c = 0; c < m.cols; ++c) m(row, c) /= norm;
}

}  // namespace

OracleWorld make_world(std::uint64_t seed, std::size_t layers, std::size_t dim, std::size_t attrs,
                       const std::vector<CorrelationLink>& correlation_spec,
                       std::size_t embed_dim) {
    require(attrs >= 1, "make_world: need at least one attribute");
    require(layers >= 1 && dim >= 1, "make_world: latent shape must be positive");
    for (const auto& link : correlation_spec) {
        require(link.first < attrs && link.second < attrs,
                "make_world: correlation_spec index out of range");
        require(link.first != link.second, "make_world: correlation_spec links an attribute to itself");
        require(link.shared_fraction >= 0.0 && link.shared_fraction <= 1.0,
                "make_world: shared_fraction outside [0,1]");
    }

    OracleWorld world;
    world.seed = seed;
    world.layers = layers;
    world.dim = dim;
    world.attrs = attrs;
    world.embed_dim = embed_dim;
    world.correlation_spec = correlation_spec;
    const std::size_t flat = layers * dim;

    Rng rng(seed);
    world.attribute_directions = Mat(attrs, flat);
    for (std::size_t a = 0; a < attrs; ++a) {
        for (std::size_t c = 0; c < flat; ++c) world.attribute_directions(a, c) = rng.gaussian();
        normalize_row(world.attribute_directions, a);
    }
    for (const auto& link : correlation_spec) {
        const double s = link.shared_fraction;
        for (std::size_t c = 0; c < flat; ++c) {
            world.attribute_directions(link.second, c) =
                s * world.attribute_directions(link.first, c) + (1.0 - s) * rng.gaussian();
        }
        normalize_row(world.attribute_directions, link.second);
    }
    world.attribute_biases.assign(attrs, 0.0);

    world.identity_projection = Mat(embed_dim, flat);
    for (std::size_t e = 0; e < embed_dim; ++e) {
        for (std::size_t c = 0; c < flat; ++c) world.identity_projection(e, c) = rng.gaussian();
        normalize_row(world.identity_projection, e);
    }
    return world;
}

std::vector<int> oracle_label(const OracleWorld& world, const LatentCode& code) {
    require(code.flat_dim() == world.flat_dim(), "oracle_label: code shape does not match world");
    Vec squashed(code.values.size());
    for (std::size_t i = 0; i < squashed.size(); ++i) squashed[i] = std::tanh(code.values[i]);
    std::vector<int> labels(world.attrs, 0);
    for (std::size_t a = 0; a < world.attrs; ++a) {
        double score = world.attribute_biases[a];
        for (std::size_t c = 0; c < squashed.size(); ++c)
            score += world.attribute_directions(a, c) * squashed[c];
        labels[a] = nn::sigmoid(score) > 0.5 ? 1 : 0;
    }
    return labels;
}

Vec identity_embed(const OracleWorld& world, const LatentCode& code) {
    require(code.flat_dim() == world.flat_dim(), "identity_embed: code shape does not match world");
    return matvec(world.identity_projection, code.values);
}

Mat estimate_correlations(const std::vector<std::vector<int>>& label_rows) {
    require(label_rows.size() >= 2, "estimate_correlations: need at least 2 rows");
    const std::size_t n = label_rows.size();
    const std::size_t attrs = label_rows.front().size();
    for (const auto& row : label_rows)
        require(row.size() == attrs, "estimate_correlations: ragged label rows");

    Vec mean(attrs, 0.0);
    for (const auto& row : label_rows)
        for (std::size_t a = 0; a < attrs; ++a) mean[a] += row[a];
    for (auto& m : mean) m /= static_cast<double>(n);

    Mat cov(attrs, attrs);
    for (const auto& row : label_rows) {
        for (std::size_t i = 0; i < attrs; ++i) {
            const double di = row[i] - mean[i];
            for (std::size_t j = i; j < attrs; ++j) cov(i, j) += di * (row[j] - mean[j]);
        }
    }

    Mat gamma(attrs, attrs);
    for (std::size_t i = 0; i < attrs; ++i) gamma(i, i) = 1.0;
    for (std::size_t i = 0; i < attrs; ++i) {
        for (std::size_t j = i + 1; j < attrs; ++j) {
            const double vi = cov(i, i);
            const double vj = cov(j, j);
            const double r = (vi > 0.0 && vj > 0.0) ? cov(i, j) / std::sqrt(vi * vj) : 0.0;
            gamma(i, j) = gamma(j, i) = std::fabs(r);
        }
    }
    return gamma;
}

void make_split(std::size_t n, double train_fraction, std::uint64_t seed,
                std::vector<std::size_t>& train_out, std::vector<std::size_t>& test_out) {
    require(train_fraction > 0.0 && train_fraction < 1.0, "make_split: fraction outside (0,1)");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, 0x51CEull));
    rng.shuffle(order);
    const auto train_count =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    train_out.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_count));
    test_out.assign(order.begin() + static_cast<std::ptrdiff_t>(train_count), order.end());
    std::sort(train_out.begin(), train_out.end());
    std::sort(test_out.begin(), test_out.end());
}

LatentDataset sample_dataset(const OracleWorld& world, std::size_t n, std::uint64_t seed,
                             double train_fraction) {
    require(n >= 10, "sample_dataset: need at least 10 samples");
    LatentDataset dataset;
    dataset.samples.reserve(n);
    const std::uint64_t code_stream = derive_seed(seed, 0xDA7Aull);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(code_stream, i));
        LatentCode code(world.layers, world.dim, rng.gaussian_vec(world.flat_dim()));
        auto labels = oracle_label(world, code);
        dataset.samples.push_back({std::move(code), std::move(labels)});
    }
    dataset.attribute_names.reserve(world.attrs);
    for (std::size_t a = 0; a < world.attrs; ++a)
        dataset.attribute_names.push_back("attr_" + std::to_string(a));

    make_split(n, train_fraction, seed, dataset.train_indices, dataset.test_indices);

    std::vector<std::vector<int>> train_labels;
    train_labels.reserve(dataset.train_indices.size());
    for (auto idx : dataset.train_indices) train_labels.push_back(dataset.samples[idx].labels);
    dataset.correlation = estimate_correlations(train_labels);
    return dataset;
}

}  // namespace latent
