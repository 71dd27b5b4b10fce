#pragma once

#include <sparselow/core/types.hpp>

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sparselow {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer, used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Deterministic seed for a (base, tag...) tuple.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags)
{
    std::uint64_t h = mix_seed(base);
    for (const std::uint64_t t : tags)
        h = mix_seed(h ^ mix_seed(t + 0x632BE59BD9B4E019ULL));
    return h;
}

/// rows x cols matrix of i.i.d. N(0, stddev^2) entries, filled column-major.
inline Matrix gaussian_matrix(Rng& rng, Index rows, Index cols, double stddev = 1.0)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix                           out(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            out(i, j) = stddev * normal(rng);
    return out;
}

inline Vector gaussian_vector(Rng& rng, Index n, double stddev = 1.0)
{
    return gaussian_matrix(rng, n, 1, stddev).col(0);
}

} // namespace sparselow
