#pragma once

#include <cstddef>
#include <functional>

namespace nsis {

// Worker count from NSIS_WORKERS, defaulting to the hardware concurrency.
std::size_t worker_count();

// Runs fn(i) for i in [0, count) on up to `workers` threads. Each index is
// processed exactly once; callers write results into slot i so aggregation
// order never depends on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  std::size_t workers = worker_count());

} // namespace nsis
