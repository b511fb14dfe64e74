#pragma once

#include <cstdint>
#include <random>

namespace gbdsde {

// splitmix64, used to decorrelate (master seed, stream id) pairs.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// One independent engine per (seed, stream) pair; streams are what make
// per-path generation reproducible under any parallel schedule.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0xA0761D6478BD642FULL * (stream + 1));
    const std::uint64_t a = splitmix64(s);
    const std::uint64_t b = splitmix64(s);
    return std::mt19937_64(a ^ (b << 1));
}

// Uniform in (0, 1), never returning the endpoints.
inline double uniform01(std::mt19937_64& eng) {
    return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

// Inverse-CDF standard normal (Moro / Beasley-Springer tails). Hand-rolled so
// that seeded sequences do not depend on the standard library implementation.
double normal_draw(std::mt19937_64& eng);

// Poisson by CDF inversion; exact and reproducible, O(mean) per draw.
unsigned poisson_draw(std::mt19937_64& eng, double mean);

}  // namespace gbdsde
