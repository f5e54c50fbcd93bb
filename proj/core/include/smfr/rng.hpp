#pragma once

#include <cstdint>
#include <random>

#include "smfr/types.hpp"

namespace smfr {

using Rng = std::mt19937_64;

/// splitmix64 finalizer over (seed, tag). Derives decorrelated substreams so
/// per-run / per-fold / per-m fits stay reproducible independent of ordering.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// rows x cols matrix of iid standard normals, filled row by row.
inline Matrix random_normal(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace smfr
