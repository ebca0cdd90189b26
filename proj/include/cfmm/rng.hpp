#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace cfmm {

/// splitmix64 step; also used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t state = seed ^ (0xd1342543de82ef95ULL * (index + 1));
    return splitmix64(state);
}

/// Seeded generator with pinned draw algorithms so that identical seeds give
/// bit-identical streams on any platform: uniforms come straight from the
/// engine's bits and normals from Box-Muller (exactly two uniforms each,
/// nothing cached). std::*_distribution is avoided on purpose, since its
/// consumption pattern is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on (0, 1].
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double normal() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    double lognormal(double log_mean, double log_sigma) {
        return std::exp(log_mean + log_sigma * normal());
    }

    /// Uniform integer in [0, bound) via rejection-free scaling; bound > 0.
    std::uint64_t below(std::uint64_t bound) {
        // 53-bit scaling is unbiased enough for shuffling small agent lists.
        return static_cast<std::uint64_t>(uniform01() * static_cast<double>(bound)) %
               bound;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace cfmm
