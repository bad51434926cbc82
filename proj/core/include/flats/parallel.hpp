#pragma once

#include <cstddef>
#include <functional>

namespace flats {

/// Worker count: FLATS_THREADS if set to a positive integer, else the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) across worker threads. Each index is
/// visited exactly once; callers write results into slot i, so output order
/// does not depend on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace flats
