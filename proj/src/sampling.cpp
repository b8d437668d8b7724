#include "classeval/sampling.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace classeval {

std::size_t uniform_index(Rng& rng, std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index over an empty range");
    const std::uint64_t range = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    for (;;) {
        const std::uint64_t draw = rng();
        if (draw < limit) return static_cast<std::size_t>(draw % range);
    }
}

std::vector<std::size_t> shuffled_indices(Rng& rng, std::size_t n) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    return order;
}

std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n, std::size_t k) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    if (k >= n) return order;
    // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
    for (std::size_t i = 0; i < k; ++i) std::swap(order[i], order[i + uniform_index(rng, n - i)]);
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

}  // namespace classeval
