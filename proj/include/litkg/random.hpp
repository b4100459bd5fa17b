#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace litkg {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; mixes seeds for independent per-task streams.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix_seed(mix_seed(mix_seed(seed) ^ a) ^ b);
}

/// Uniform in [0, 1) with 53 random bits. Written out so results do not depend
/// on the standard library's distribution implementation.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n).
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[uniform_below(rng, i)]);
    }
}

/// Walker's alias method: O(1) draws from a fixed discrete distribution.
class AliasTable {
public:
    AliasTable() = default;
    /// Weights must be non-negative with a positive sum.
    explicit AliasTable(std::span<const double> weights);

    std::size_t size() const { return prob_.size(); }
    std::size_t sample(Rng& rng) const;

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

}  // namespace litkg
