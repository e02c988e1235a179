#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace crimepass {

// Runs fn(i) for i in [0, n) over a fixed block decomposition. Blocks are
// claimed dynamically by worker threads, but the block boundaries depend only
// on n, so any per-block output written to preallocated slots is identical
// for every thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// Worker count actually used for a requested cap (0 = hardware concurrency).
int effective_threads(int requested);

} // namespace crimepass
