#pragma once

#include <cstddef>
#include <functional>

namespace ocshield {

/// Worker count: hardware concurrency, capped by the OCSHIELD_THREADS
/// environment variable when set.
std::size_t worker_count();

/// Run fn(i) for i in [0, n) across worker threads in contiguous chunks.
/// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace ocshield
