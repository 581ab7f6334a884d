#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "latent/transformer.hpp"
#include "latent/world.hpp"

namespace latent {

/// Landmark positions over time: frame x point x (x, y), pixel units.
struct LandmarkTrack {
    std::size_t frame_count = 0;
    std::size_t point_count = 0;
    Vec values;  // frame-major, then point, then x/y

    LandmarkTrack() = default;
    LandmarkTrack(std::size_t frames, std::size_t points)
        : frame_count(frames), point_count(points), values(frames * points * 2, 0.0) {}

    double& at(std::size_t frame, std::size_t point, std::size_t axis) {
        return values[(frame * point_count + point) * 2 + axis];
    }
    double at(std::size_t frame, std::size_t point, std::size_t axis) const {
        return values[(frame * point_count + point) * 2 + axis];
    }
};

/// Normalized gaussian kernel with radius ceil(3*sigma); weights sum to 1.
Vec gaussian_kernel(double sigma);

/// Convolves every coordinate series along time with the normalized kernel,
/// replicating the boundary frames.
LandmarkTrack gaussian_smooth_track(const LandmarkTrack& track, double sigma);

/// H x W (x C) image with values in [0,1], interleaved channels.
struct ImageGrid {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 1;
    Vec values;

    ImageGrid() = default;
    ImageGrid(std::size_t h, std::size_t w, std::size_t c)
        : height(h), width(w), channels(c), values(h * w * c, 0.0) {}

    double& at(std::size_t y, std::size_t x, std::size_t c) {
        return values[(y * width + x) * channels + c];
    }
    double at(std::size_t y, std::size_t x, std::size_t c) const {
        return values[(y * width + x) * channels + c];
    }
};

struct MaskGrid {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> values;

    MaskGrid() = default;
    MaskGrid(std::size_t h, std::size_t w) : height(h), width(w), values(h * w, 0) {}

    bool at(std::size_t y, std::size_t x) const { return values[y * width + x] != 0; }
    void set(std::size_t y, std::size_t x, bool v) { values[y * width + x] = v ? 1 : 0; }

    bool border_free() const;
    std::size_t count() const;
};

/// Filled convex hull of the points ((x, y) pixel coordinates), dilated by
/// `margin` pixels (euclidean distance), border row/column always cleared.
/// Throws on fewer than 3 non-collinear points.
MaskGrid mask_from_landmarks(const std::vector<std::array<double, 2>>& points, std::size_t height,
                             std::size_t width, double margin);

/// Gradient-domain blend: inside the mask, solves the discrete Poisson
/// equation with the source gradient as guidance and the target as
/// Dirichlet boundary; outside, copies the target. Conjugate gradient to
/// max residual 1e-8, iteration cap 10*H*W; throws on non-convergence.
ImageGrid poisson_blend(const ImageGrid& source, const ImageGrid& target, const MaskGrid& mask);

struct LatentSequence {
    std::vector<LatentCode> frames;
};

/// Mean consecutive-frame displacement norm, normalized by sqrt(flat dim).
double temporal_consistency(const LatentSequence& seq);

/// Framewise edit with a fixed scaling factor.
LatentSequence edit_sequence(const LatentSequence& seq, const TransformerModel& model,
                             double alpha);

/// Progressive edit: the scaling factor ramps linearly from alpha_start at
/// the first frame to alpha_end at the last.
LatentSequence edit_sequence_ramp(const LatentSequence& seq, const TransformerModel& model,
                                  double alpha_start, double alpha_end);

/// Reported stability numbers for a framewise edit: displacement_variation
/// bounds the consecutive-frame change of the displacement field, so
/// edited_consistency <= original_consistency + |alpha| * displacement_variation.
struct SequenceEditDiagnostic {
    double original_consistency = 0.0;
    double edited_consistency = 0.0;
    double displacement_variation = 0.0;
};

SequenceEditDiagnostic sequence_edit_diagnostic(const LatentSequence& seq,
                                                const TransformerModel& model, double alpha);

}  // namespace latent
