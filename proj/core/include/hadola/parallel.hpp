#pragma once

#include <cstddef>
#include <functional>

namespace hadola {

// Worker cap: HADOLA_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads using static
// contiguous chunks. Callers write results into pre-sized slots indexed by i,
// which keeps outputs independent of scheduling. The first exception thrown by
// any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hadola
