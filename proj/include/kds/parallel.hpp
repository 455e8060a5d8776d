#pragma once

// Index-parallel loops. Results are written by index so any reduction done
// afterwards runs in a fixed order regardless of the thread count.

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace kds {

/// KDS_THREADS if set to a positive integer, else hardware concurrency (at least 1).
int thread_count();

// Calls fn(i) for i in [0, n) over static contiguous chunks. After all workers
// finish, the exception from the lowest-numbered failing chunk is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads = 0);

}  // namespace kds
