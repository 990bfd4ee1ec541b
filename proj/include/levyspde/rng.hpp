#pragma once

#include <cstdint>
#include <random>

namespace levyspde {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijection on 64-bit words with good avalanche.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Counter-based stream split: the seed of realization `index` under `master`
/// depends only on the pair, never on scheduling order.
///
///   seed(master, i) = splitmix64(splitmix64(master) + φ·(i + 1)),  φ = 0x9E3779B97F4A7C15
///
/// A symmetric combination such as h(master) ^ h(i + 1) would map (1, 1)
/// and (2, 0) to the same seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master) + 0x9E3779B97F4A7C15ull * (index + 1));
}

}  // namespace levyspde
