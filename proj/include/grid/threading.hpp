#pragma once

#include <cstddef>
#include <functional>

namespace grid {

// Worker count: min(hardware_concurrency, GRID_THREADS if set). Always >= 1.
std::size_t worker_count();

// Runs fn(i) for i in [0, n) on up to worker_count() threads. Results must
// be written to disjoint slots; the call returns after all items finish.
// Any exception from fn is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace grid
