#pragma once

#include <cstdint>
#include <functional>

namespace voxmill {

/// Process-wide cap on worker threads (CLI --threads). 0 restores the
/// hardware default. All parallel code in this library is written so results
/// are bitwise identical for any worker count.
void set_thread_count(int n);
int thread_count();

/// Runs fn over [0, n) in contiguous chunks, one per worker. Runs inline
/// when a single worker suffices.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn);

/// Runs fn(i) for i in [0, n) with at most `workers` tasks in flight.
/// Used where each task is heavyweight (one convolution per orientation).
void parallel_tasks(int n, int workers, const std::function<void(int)>& fn);

}  // namespace voxmill
