#ifndef COGLASSO_PARALLEL_HPP
#define COGLASSO_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace coglasso {

// Global cap on worker threads (0 = hardware concurrency).
void set_max_threads(unsigned count);
unsigned max_threads();

// Runs fn(i) for i in [0, count). Work items must be independent; results
// are written by index, so output is identical regardless of scheduling.
// Nested calls run sequentially to avoid oversubscription.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace coglasso

#endif
