#pragma once

#include <cstddef>
#include <functional>

namespace gpmi {

/// Number of worker threads used by parallel_for. Defaults to the hardware
/// concurrency. Outputs never depend on this value.
int num_threads();
void set_num_threads(int n);

/// Calls body(begin, end) on disjoint contiguous chunks covering [0, n).
/// Chunks are assigned statically; body must only write to per-index state.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

} // namespace gpmi
