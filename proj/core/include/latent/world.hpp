#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latent/mat.hpp"

namespace latent {

/// Layered latent code: layers x dim entries, stored row-major. All math
/// operates on the flattened vector; the layered shape is carried along.
struct LatentCode {
    std::size_t layers = 0;
    std::size_t dim = 0;
    Vec values;

    LatentCode() = default;
    LatentCode(std::size_t l, std::size_t d) : layers(l), dim(d), values(l * d, 0.0) {}
    LatentCode(std::size_t l, std::size_t d, Vec v) : layers(l), dim(d), values(std::move(v)) {}

    std::size_t flat_dim() const { return layers * dim; }
};

/// One induced label correlation: direction `second` is rebuilt as
/// normalize(shared_fraction * v_first + (1 - shared_fraction) * fresh gaussian).
struct CorrelationLink {
    std::size_t first = 0;
    std::size_t second = 0;
    double shared_fraction = 0.0;
};

/// Deterministic stand-in for the generator latent space: fixed attribute
/// score directions with ground-truth labels, and a fixed linear identity
/// embedding. Same seed, same world.
struct OracleWorld {
    std::uint64_t seed = 0;
    std::size_t layers = 0;
    std::size_t dim = 0;
    std::size_t attrs = 0;
    std::size_t embed_dim = 0;
    Mat attribute_directions;  // attrs x (layers*dim), unit rows
    Vec attribute_biases;      // attrs, zero by default (balanced attributes)
    std::vector<CorrelationLink> correlation_spec;
    Mat identity_projection;  // embed_dim x (layers*dim), unit rows

    std::size_t flat_dim() const { return layers * dim; }
};

OracleWorld make_world(std::uint64_t seed, std::size_t layers, std::size_t dim, std::size_t attrs,
                       const std::vector<CorrelationLink>& correlation_spec,
                       std::size_t embed_dim = 16);

/// Ground-truth labels: label_i = 1 iff sigmoid(v_i . tanh(flat(code)) + b_i)
/// is strictly greater than 0.5. The elementwise tanh keeps the decision
/// boundary mildly nonlinear.
std::vector<int> oracle_label(const OracleWorld& world, const LatentCode& code);

/// Fixed linear identity embedding of a code.
Vec identity_embed(const OracleWorld& world, const LatentCode& code);

struct LatentSample {
    LatentCode code;
    std::vector<int> labels;
};

struct LatentDataset {
    std::vector<LatentSample> samples;
    std::vector<std::string> attribute_names;
    Mat correlation;  // gamma, estimated on the train split
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;

    std::size_t attrs() const { return attribute_names.size(); }
};

/// Absolute Pearson correlation between binary label columns. Columns with
/// zero variance correlate 0 against everything (diagonal stays 1).
Mat estimate_correlations(const std::vector<std::vector<int>>& label_rows);

/// Seeded-shuffle split of n indices into train/test, train takes
/// round(train_fraction * n). Indices are returned sorted.
void make_split(std::size_t n, double train_fraction, std::uint64_t seed,
                std::vector<std::size_t>& train_out, std::vector<std::size_t>& test_out);

/// n i.i.d. standard-gaussian codes labeled by the oracle, split 90/10 by
/// default; gamma is estimated on the train split only. Per-sample seeds are
/// derived from (seed, index), so generation order never matters.
LatentDataset sample_dataset(const OracleWorld& world, std::size_t n, std::uint64_t seed,
                             double train_fraction = 0.9);

}  // namespace latent
