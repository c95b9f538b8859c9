#pragma once

#include <cstddef>
#include <functional>

namespace ergolab {

/// Worker count: hardware concurrency capped by ERGOLAB_THREADS when set.
unsigned worker_count();

/// Runs body(i) for i in [0, n) on worker_count() threads. Work is handed
/// out by an atomic counter; callers store results by index so the outcome
/// never depends on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ergolab
