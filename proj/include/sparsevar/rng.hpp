#pragma once

#include <cstdint>
#include <random>

namespace sparsevar {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates neighbouring stream ids before seeding.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for sub-task `stream` of a run seeded with `seed` (columns,
/// equations, replicates, replications). Independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(seed ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(derive_seed(seed, stream)); }

}  // namespace sparsevar
