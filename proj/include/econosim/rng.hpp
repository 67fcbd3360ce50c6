#pragma once

#include <cstdint>
#include <random>

namespace econosim {

using Rng = std::mt19937_64;

/// Mixes arbitrary 64-bit words into a well-scrambled seed (splitmix64
/// finalizer). Used to derive independent per-run streams from
/// (base seed, scenario parameters) without correlated low bits.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t seed_combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ mix64(b));
}

/// Uniform integer in [0, n), n >= 1. Rejection sampling, no modulo bias.
/// Deterministic for a given engine state (std distributions are not
/// pinned across library versions, so we roll our own).
inline std::uint64_t bounded_u64(Rng& rng, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % n;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform_unit(rng) < p;
}

}  // namespace econosim
