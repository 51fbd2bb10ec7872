#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace geotri {

// All randomness in the library flows through a 64-bit Mersenne Twister.
// The standard distributions are implementation-defined, so the helpers
// below draw directly from the engine to keep results identical across
// standard libraries.
using Rng = std::mt19937_64;

// Uniform integer in [0, n). Rejection sampling, so no modulo bias.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

// Uniform double in [0, 1) with 53 random bits.
double uniform_unit(Rng& rng);

double uniform_real(Rng& rng, double lo, double hi);

// Standard normal via Box-Muller (one value per call, the pair's sine
// branch is discarded).
double standard_normal(Rng& rng);

// SplitMix64 finalizer; used to derive independent per-item seeds.
std::uint64_t mix_seed(std::uint64_t x);

// 64-bit FNV-1a; stable across platforms, used for per-relation seeds.
std::uint64_t fnv1a(std::string_view s);

}  // namespace geotri
