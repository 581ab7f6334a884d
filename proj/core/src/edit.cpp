#include "latent/edit.hpp"

#include <algorithm>
#include <stdexcept>

namespace latent {

LatentCode edit(const LatentCode& code, const TransformerModel& model, double alpha) {
    return model.apply(code, alpha);
}

LatentCode edit_with_displacement(const LatentCode& code, const Vec& direction, double alpha) {
    require(direction.size() == code.flat_dim(),
            "edit_with_displacement: direction length mismatch");
    if (alpha == 0.0) return code;
    LatentCode out = code;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += alpha * direction[i];
    return out;
}

SequentialResult sequential_edit(const LatentCode& code, const std::vector<EditStep>& steps) {
    SequentialResult result;
    result.intermediates.reserve(steps.size() + 1);
    result.intermediates.push_back(code);
    for (std::size_t s = 0; s < steps.size(); ++s) {
        const auto& step = steps[s];
        require(step.model != nullptr, "sequential_edit: step " + std::to_string(s) +
                                           " has no model");
        try {
            result.intermediates.push_back(step.model->apply(result.intermediates.back(),
                                                             step.alpha));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("sequential_edit: step " + std::to_string(s) +
                                        " (attribute " +
                                        std::to_string(step.model->target_attribute()) +
                                        "): " + e.what());
        }
    }
    return result;
}

SweepResult sweep(const LatentCode& code, const TransformerModel& model, double d,
                  std::size_t count) {
    require(d != 0.0, "sweep: d must be nonzero");
    require(count >= 1, "sweep: count must be positive");
    SweepResult result;
    result.factors.reserve(count);
    result.codes.reserve(count);
    for (std::size_t j = 1; j <= count; ++j) {
        result.factors.push_back(static_cast<double>(j) / static_cast<double>(count) * 2.0 * d);
    }
    if (d < 0.0) std::reverse(result.factors.begin(), result.factors.end());
    for (double factor : result.factors) result.codes.push_back(model.apply(code, factor));
    return result;
}

}  // namespace latent
