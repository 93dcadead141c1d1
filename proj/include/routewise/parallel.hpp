#pragma once

#include <cstddef>
#include <functional>

namespace routewise {

/// Worker count: ROUTEWISE_THREADS if set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
unsigned worker_count();

/// Runs body(i) for i in [0, count), split into contiguous chunks over
/// worker_count() threads. Bodies must only write to per-index state. The
/// first exception thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace routewise
