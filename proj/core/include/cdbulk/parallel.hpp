#pragma once

#include <cstddef>
#include <functional>

namespace cdbulk {

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Tasks write to
/// caller-owned slots indexed by i, so results are independent of the thread
/// count and of scheduling. The first exception thrown by a task is rethrown
/// on the calling thread after all workers have joined.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

} // namespace cdbulk
