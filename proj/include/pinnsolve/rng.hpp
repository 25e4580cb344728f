#pragma once

#include <cstddef>
#include <cstdint>

namespace pinnsolve {

/// SplitMix64 generator keyed by (seed, stream). Each sampler draws from its
/// own stream so adding draws to one sampler never perturbs another. Output is
/// fully specified by this code (no std distributions), hence identical on
/// every platform.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n), unbiased.
    std::size_t below(std::size_t n);
    /// Standard normal via Box-Muller (one draw per call, no caching).
    double normal();

    static std::uint64_t mix(std::uint64_t z);

private:
    std::uint64_t state_;
};

/// Stream identifiers for the samplers.
namespace streams {
inline constexpr std::uint64_t kResidual = 1;
inline constexpr std::uint64_t kInitial = 2;
inline constexpr std::uint64_t kBoundary = 3;  // + edge ordinal
inline constexpr std::uint64_t kSensors = 16;
inline constexpr std::uint64_t kParams = 32;
inline constexpr std::uint64_t kPerFunction = 1u << 20;  // + 8 * sample index + set
}  // namespace streams

}  // namespace pinnsolve
