#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace a2bcd {

// All stochastic code draws through these helpers instead of
// std::*_distribution, whose output is implementation-defined. mt19937_64
// itself is fully specified, so runs are reproducible across compilers.

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return std::mt19937_64{seed + stream};
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n) via 128-bit multiply-shift (bias < 2^-64).
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::size_t>((static_cast<u128>(rng()) * static_cast<u128>(n)) >> 64);
}

/// Standard normal via Box-Muller (deterministic, two draws per value).
inline double normal01(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

/// SplitMix64 finalizer; used to hash (seed, k, block) tuples into
/// reproducible per-point randomness without an RNG object.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace a2bcd
