#pragma once

#include <functional>

namespace trusmap {

// Worker count for parallel_for. 0 or negative selects hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Runs fn(i) for i in [0, n). Work items are leased from a shared counter, so
// callers that need determinism must make each item independent of execution
// order (all call sites here write to per-item slots).
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace trusmap
