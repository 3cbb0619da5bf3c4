#pragma once

#include <cstdint>

namespace poc {

/// One splitmix64 step: advances `state` and returns the mixed output.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Stream seed for trial `index` under a master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t state = seed ^ splitmix64_next(index);
    return splitmix64_next(state);
}

/// Uniform double in (0, 1) from the top 53 bits of a 64-bit generator.
template <class Engine>
double uniform01(Engine& engine) {
    const std::uint64_t bits = static_cast<std::uint64_t>(engine()) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace poc
