#pragma once

#include <functional>

namespace pcat {

// Thread count resolution: 0 means "auto" (PCAT_THREADS env var if set,
// otherwise hardware concurrency).
int resolve_threads(int requested);

// Runs fn(i) for i in [0, count) across up to `threads` workers with static
// contiguous partitioning. Callers must write results to per-index slots;
// with that discipline output is independent of the thread count.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace pcat
