#pragma once
// Deterministic work distribution: item k always computes the same value
// regardless of thread count or completion order, because every item derives
// its own seed and writes to its own slot.

#include <cstddef>
#include <functional>

namespace qcrel {

// Runs fn(0..n-1) across up to max_threads threads (0 = hardware count).
void parallel_for(std::size_t n, unsigned max_threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace qcrel
