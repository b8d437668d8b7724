#ifndef CLASSEVAL_SAMPLING_HPP
#define CLASSEVAL_SAMPLING_HPP

// Seeded sampling with results fixed by the seed alone. The standard
// distributions are implementation-defined, so these draw directly from the
// 64-bit Mersenne Twister, whose output sequence is specified.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace classeval {

using Rng = std::mt19937_64;

/// Uniform in [0, n) by rejection sampling. n must be > 0.
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> shuffled_indices(Rng& rng, std::size_t n);

/// k distinct indices from [0, n), returned in ascending order. k >= n gives all.
std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n, std::size_t k);

}  // namespace classeval

#endif  // CLASSEVAL_SAMPLING_HPP
