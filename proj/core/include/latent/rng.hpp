#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace latent {

/// splitmix64 step; used to derive independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Independent sub-seed for stream `stream` of a master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(seed ^ mix_seed(stream + 0x632be59bd9b4e019ull));
}

/// Deterministic RNG used everywhere seeds matter. Gaussian sampling is
/// Box-Muller over a splitmix64 stream rather than std::normal_distribution,
/// so identical seeds give identical streams on any standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix_seed(seed ^ 0x5bf03635ull)) {}

    std::uint64_t next() {
        state_ = mix_seed(state_);
        return state_;
    }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform index in [0, n). Modulo bias is negligible for n << 2^64.
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }

    /// Standard normal via Box-Muller.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    std::vector<double> gaussian_vec(std::size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = gaussian();
        return v;
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace latent
