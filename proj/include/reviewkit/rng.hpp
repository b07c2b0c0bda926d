#pragma once

// Portable seeded randomness. The standard distributions are
// implementation-defined, so every sampler in the library draws through
// these helpers to keep outputs identical across standard libraries.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace reviewkit {

using Rng = std::mt19937_64;

/// Uniform integer in [0, bound). bound must be > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
    // Rejection sampling on the top of the range removes modulo bias.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
    std::uint64_t draw = rng();
    while (draw > limit) draw = rng();
    return draw % bound;
}

/// Fair coin from the top bit.
inline bool coin_flip(Rng& rng) { return (rng() >> 63) != 0; }

template <typename T>
void shuffle_in_place(std::span<T> items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Request-scoped seed: stable hash of an item id mixed with a base seed.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view id) {
    return splitmix64(base_seed ^ fnv1a64(id));
}

} // namespace reviewkit
