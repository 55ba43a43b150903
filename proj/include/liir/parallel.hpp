#pragma once

#include <cstddef>
#include <functional>

namespace liir {

// Worker-thread budget: min(hardware_concurrency, LIIR_THREADS if set).
// Always at least 1.
int worker_threads();

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks across
// worker threads; callers must only write to disjoint output slices.
// Deterministic outputs do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace liir
