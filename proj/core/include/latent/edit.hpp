#pragma once

#include <cstddef>
#include <vector>

#include "latent/transformer.hpp"
#include "latent/world.hpp"

namespace latent {

struct EditStep {
    const TransformerModel* model = nullptr;
    double alpha = 0.0;
};

/// Single edit; same contract as TransformerModel::apply.
LatentCode edit(const LatentCode& code, const TransformerModel& model, double alpha);

/// Fixed-displacement mode: moves along a precomputed direction instead of
/// re-evaluating f. Editing with alpha then -alpha round-trips exactly.
LatentCode edit_with_displacement(const LatentCode& code, const Vec& direction, double alpha);

struct SequentialResult {
    /// steps.size() + 1 codes; starts with the source, ends with the result.
    std::vector<LatentCode> intermediates;

    const LatentCode& result() const { return intermediates.back(); }
};

/// Left fold of the steps, each displacement re-evaluated at the previous
/// intermediate code. Shape errors name the failing step.
SequentialResult sequential_edit(const LatentCode& code, const std::vector<EditStep>& steps);

struct SweepResult {
    std::vector<double> factors;  // strictly increasing
    std::vector<LatentCode> codes;
};

/// Edits the same source code at factors (j/count)*2*d, j = 1..count
/// (0.2d, 0.4d, ..., 2d for count 10). Factors are reported in increasing
/// order, so a negative d reverses the list.
SweepResult sweep(const LatentCode& code, const TransformerModel& model, double d,
                  std::size_t count = 10);

}  // namespace latent
