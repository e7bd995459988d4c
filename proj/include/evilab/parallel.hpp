#pragma once

#include <cstddef>
#include <functional>

namespace evilab {

/// Worker count from EVILAB_WORKERS, else the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(begin, end) over contiguous chunks of [0, n) on up to worker_count() threads.
/// The first exception (by chunk order) is rethrown after all chunks finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace evilab
