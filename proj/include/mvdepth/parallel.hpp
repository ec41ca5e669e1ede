#pragma once

#include <cstddef>
#include <functional>

namespace mvdepth {

/// `requested` > 0 is returned as is. Otherwise MVDEPTH_THREADS is consulted,
/// then std::thread::hardware_concurrency() (at least 1).
int resolve_thread_count(int requested = 0);

/// Runs fn(i) for every i in [0, count) on `workers` threads. Items are
/// independent, so results never depend on the worker count. Exceptions
/// thrown by fn are rethrown on the calling thread.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace mvdepth
