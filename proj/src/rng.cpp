#include "coglasso/rng.hpp"

#include <algorithm>

#include "coglasso/errors.hpp"

namespace coglasso {

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    if (k > n)
        throw ParameterError("cannot draw " + std::to_string(k) + " distinct indices from " +
                             std::to_string(n));
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t pick = i + static_cast<std::size_t>(rng.uniform_below(n - i));
        std::swap(pool[i], pool[pick]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace coglasso
