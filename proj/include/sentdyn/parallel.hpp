#pragma once

#include <cstddef>
#include <functional>

namespace sentdyn {

// Worker cap: THREADS environment variable if set and positive, otherwise
// the hardware concurrency.
std::size_t worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
// executed exactly once; callers must write results into per-index slots so
// that output never depends on scheduling. The first exception thrown by any
// body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace sentdyn
