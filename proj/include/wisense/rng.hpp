#pragma once

#include <cmath>
#include <cstdint>

#include "wisense/common.hpp"

// Counter-based randomness. Every draw is a pure function of
// (seed, stream, counter...), so output never depends on evaluation order and
// the independent randomness sources of a scenario (noise, packet phase,
// weight init, shuffling) stay decoupled: toggling one leaves the others
// bit-identical under the same seed.

namespace wisense::rng {

inline std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t kStreamNoise = 1;
constexpr std::uint64_t kStreamPhaseOffset = 2;
constexpr std::uint64_t kStreamWeights = 3;
constexpr std::uint64_t kStreamShuffle = 4;

inline std::uint64_t key(std::uint64_t seed, std::uint64_t stream, std::uint64_t a = 0,
                         std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = mix(seed ^ 0x243F6A8885A308D3ull);
    h = mix(h ^ stream);
    h = mix(h ^ a);
    h = mix(h ^ b);
    return mix(h ^ c);
}

inline double uniform01(std::uint64_t k) {  // [0, 1)
    return static_cast<double>(k >> 11) * 0x1.0p-53;
}

// Box-Muller pair; the radial uniform is shifted into (0, 1] so log() is safe.
inline void gauss_pair(std::uint64_t k, double& g0, double& g1) {
    const double u1 = (static_cast<double>(mix(k) >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01(mix(k ^ 0x5851F42D4C957F2Dull));
    const double r = std::sqrt(-2.0 * std::log(u1));
    g0 = r * std::cos(2.0 * kPi * u2);
    g1 = r * std::sin(2.0 * kPi * u2);
}

}  // namespace wisense::rng
