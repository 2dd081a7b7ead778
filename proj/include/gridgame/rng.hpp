#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gridgame {

// All randomness in the library flows from one master seed through named
// substreams, so a run is a pure function of its manifest.

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// Deterministic engine for the substream identified by (seed, name).
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name) {
    return std::mt19937_64(detail::splitmix64(seed ^ detail::fnv1a(name)));
}

/// Substream keyed by (seed, name, index), e.g. one stream per episode or bus.
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name, std::uint64_t index) {
    return std::mt19937_64(
        detail::splitmix64(detail::splitmix64(seed ^ detail::fnv1a(name)) ^ index));
}

/// Stateless uniform draw in [0, 1) keyed by (seed, a, b); same key, same value.
/// Used for per-(bus, step) load-noise samples so replay needs no stored state.
inline double hash_uniform01(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = detail::splitmix64(detail::splitmix64(seed ^ (a * 0x9e3779b97f4a7c15ULL)) ^ b);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace gridgame
