#include "latent/video.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace latent {

Vec gaussian_kernel(double sigma) {
    require(sigma > 0.0, "gaussian_kernel: sigma must be positive");
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    Vec kernel(2 * radius + 1);
    double sum = 0.0;
    for (std::ptrdiff_t j = -radius; j <= radius; ++j) {
        const double w = std::exp(-0.5 * static_cast<double>(j * j) / (sigma * sigma));
        kernel[static_cast<std::size_t>(j + radius)] = w;
        sum += w;
    }
    for (auto& w : kernel) w /= sum;
    return kernel;
}

LandmarkTrack gaussian_smooth_track(const LandmarkTrack& track, double sigma) {
    const Vec kernel = gaussian_kernel(sigma);
    const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    const auto frames = static_cast<std::ptrdiff_t>(track.frame_count);
    LandmarkTrack out(track.frame_count, track.point_count);
    for (std::size_t p = 0; p < track.point_count; ++p) {
        for (std::size_t axis = 0; axis < 2; ++axis) {
            for (std::ptrdiff_t t = 0; t < frames; ++t) {
                double acc = 0.0;
                for (std::ptrdiff_t j = -radius; j <= radius; ++j) {
                    const auto src = std::clamp<std::ptrdiff_t>(t + j, 0, frames - 1);
                    acc += kernel[static_cast<std::size_t>(j + radius)] *
                           track.at(static_cast<std::size_t>(src), p, axis);
                }
                out.at(static_cast<std::size_t>(t), p, axis) = acc;
            }
        }
    }
    return out;
}

bool MaskGrid::border_free() const {
    for (std::size_t x = 0; x < width; ++x) {
        if (at(0, x) || at(height - 1, x)) return false;
    }
    for (std::size_t y = 0; y < height; ++y) {
        if (at(y, 0) || at(y, width - 1)) return false;
    }
    return true;
}

std::size_t MaskGrid::count() const {
    std::size_t n = 0;
    for (auto v : values) n += v != 0 ? 1 : 0;
    return n;
}

namespace {

using Point = std::array<double, 2>;

double cross(const Point& o, const Point& a, const Point& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

/// Andrew monotone chain; counter-clockwise hull without collinear points.
std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return {};
    std::vector<Point> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull.size() >= 3 ? hull : std::vector<Point>{};
}

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
    const double dx = b[0] - a[0];
    const double dy = b[1] - a[1];
    const double len2 = dx * dx + dy * dy;
    double t = len2 == 0.0 ? 0.0 : ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
    const double px = a[0] + t * dx - p[0];
    const double py = a[1] + t * dy - p[1];
    return std::sqrt(px * px + py * py);
}

/// 0 inside or on the hull, otherwise euclidean distance to the boundary.
double hull_distance(const Point& p, const std::vector<Point>& hull) {
    bool inside = true;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % hull.size()];
        if (cross(a, b, p) < -1e-12) {
            inside = false;
            break;
        }
    }
    if (inside) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
        best = std::min(best, point_segment_distance(p, hull[i], hull[(i + 1) % hull.size()]));
    }
    return best;
}

}  // namespace

MaskGrid mask_from_landmarks(const std::vector<Point>& points, std::size_t height,
                             std::size_t width, double margin) {
    require(points.size() >= 3, "mask_from_landmarks: need at least 3 points");
    require(margin >= 0.0, "mask_from_landmarks: margin must be non-negative");
    const auto hull = convex_hull(points);
    if (hull.empty()) {
        throw std::invalid_argument("mask_from_landmarks: degenerate (collinear) hull");
    }
    MaskGrid mask(height, width);
    for (std::size_t y = 1; y + 1 < height; ++y) {
        for (std::size_t x = 1; x + 1 < width; ++x) {
            const Point p{static_cast<double>(x), static_cast<double>(y)};
            mask.set(y, x, hull_distance(p, hull) <= margin);
        }
    }
    return mask;
}

ImageGrid poisson_blend(const ImageGrid& source, const ImageGrid& target, const MaskGrid& mask) {
    require(source.height == target.height && source.width == target.width &&
                source.channels == target.channels,
            "poisson_blend: source/target shape mismatch");
    require(mask.height == target.height && mask.width == target.width,
            "poisson_blend: mask shape mismatch");
    require(mask.border_free(), "poisson_blend: mask touches the image border");

    ImageGrid out = target;
    const std::size_t unknowns = mask.count();
    if (unknowns == 0) return out;

    // Index the masked pixels.
    std::vector<std::ptrdiff_t> index(mask.height * mask.width, -1);
    std::vector<std::pair<std::size_t, std::size_t>> pixels;
    pixels.reserve(unknowns);
    for (std::size_t y = 0; y < mask.height; ++y) {
        for (std::size_t x = 0; x < mask.width; ++x) {
            if (mask.at(y, x)) {
                index[y * mask.width + x] = static_cast<std::ptrdiff_t>(pixels.size());
                pixels.emplace_back(y, x);
            }
        }
    }
    const std::array<std::array<std::ptrdiff_t, 2>, 4> n4{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

    // A v: 4 v_p - sum of masked-neighbor values.
    const auto apply_a = [&](const Vec& v, Vec& av) {
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            const auto [y, x] = pixels[i];
            double acc = 4.0 * v[i];
            for (const auto& d : n4) {
                const auto ny = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(y) + d[0]);
                const auto nx = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(x) + d[1]);
                const auto j = index[ny * mask.width + nx];
                if (j >= 0) acc -= v[static_cast<std::size_t>(j)];
            }
            av[i] = acc;
        }
    };

    const std::size_t max_iterations = 10 * mask.height * mask.width;
    for (std::size_t c = 0; c < target.channels; ++c) {
        // Right-hand side: Dirichlet target values plus the source divergence
        // div_p = 4 s_p - sum of the 4 neighbor source values.
        Vec b(unknowns, 0.0);
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            const auto [y, x] = pixels[i];
            double rhs = 4.0 * source.at(y, x, c);
            for (const auto& d : n4) {
                const auto ny = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(y) + d[0]);
                const auto nx = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(x) + d[1]);
                rhs -= source.at(ny, nx, c);
                if (!mask.at(ny, nx)) rhs += target.at(ny, nx, c);
            }
            b[i] = rhs;
        }

        // Conjugate gradient, warm-started from the source patch.
        Vec f(unknowns);
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            const auto [y, x] = pixels[i];
            f[i] = source.at(y, x, c);
        }
        Vec av(unknowns);
        apply_a(f, av);
        Vec r(unknowns);
        for (std::size_t i = 0; i < unknowns; ++i) r[i] = b[i] - av[i];
        Vec p = r;
        double r_norm2 = dot(r, r);

        const auto max_abs = [](const Vec& v) {
            double m = 0.0;
            for (double x : v) m = std::max(m, std::fabs(x));
            return m;
        };

        std::size_t iter = 0;
        while (max_abs(r) > 1e-8) {
            if (iter++ >= max_iterations) {
                throw std::runtime_error("poisson_blend: no convergence after " +
                                         std::to_string(max_iterations) +
                                         " iterations; residual " + std::to_string(max_abs(r)));
            }
            apply_a(p, av);
            const double alpha = r_norm2 / dot(p, av);
            for (std::size_t i = 0; i < unknowns; ++i) {
                f[i] += alpha * p[i];
                r[i] -= alpha * av[i];
            }
            const double next_norm2 = dot(r, r);
            const double beta = next_norm2 / r_norm2;
            r_norm2 = next_norm2;
            for (std::size_t i = 0; i < unknowns; ++i) p[i] = r[i] + beta * p[i];
        }

        for (std::size_t i = 0; i < pixels.size(); ++i) {
            const auto [y, x] = pixels[i];
            out.at(y, x, c) = std::clamp(f[i], 0.0, 1.0);
        }
    }
    return out;
}

double temporal_consistency(const LatentSequence& seq) {
    require(seq.frames.size() >= 2, "temporal_consistency: need at least 2 frames");
    const double scale = std::sqrt(static_cast<double>(seq.frames.front().flat_dim()));
    double acc = 0.0;
    for (std::size_t t = 0; t + 1 < seq.frames.size(); ++t) {
        acc += nn::l2_distance(seq.frames[t + 1].values, seq.frames[t].values) / scale;
    }
    return acc / static_cast<double>(seq.frames.size() - 1);
}

LatentSequence edit_sequence(const LatentSequence& seq, const TransformerModel& model,
                             double alpha) {
    LatentSequence out;
    out.frames.reserve(seq.frames.size());
    for (const auto& frame : seq.frames) out.frames.push_back(model.apply(frame, alpha));
    return out;
}

LatentSequence edit_sequence_ramp(const LatentSequence& seq, const TransformerModel& model,
                                  double alpha_start, double alpha_end) {
    LatentSequence out;
    const std::size_t n = seq.frames.size();
    out.frames.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double u = n <= 1 ? 0.0 : static_cast<double>(t) / static_cast<double>(n - 1);
        out.frames.push_back(model.apply(seq.frames[t], alpha_start + u * (alpha_end - alpha_start)));
    }
    return out;
}

SequenceEditDiagnostic sequence_edit_diagnostic(const LatentSequence& seq,
                                                const TransformerModel& model, double alpha) {
    SequenceEditDiagnostic diag;
    diag.original_consistency = temporal_consistency(seq);
    const auto edited = edit_sequence(seq, model, alpha);
    diag.edited_consistency = temporal_consistency(edited);
    const double scale = std::sqrt(static_cast<double>(seq.frames.front().flat_dim()));
    for (std::size_t t = 0; t + 1 < seq.frames.size(); ++t) {
        const Vec fa = model.edit_direction(seq.frames[t]);
        const Vec fb = model.edit_direction(seq.frames[t + 1]);
        diag.displacement_variation =
            std::max(diag.displacement_variation, nn::l2_distance(fb, fa) / scale);
    }
    return diag;
}

}  // namespace latent
