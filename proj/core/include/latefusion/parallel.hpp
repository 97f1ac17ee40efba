#pragma once

#include <cstddef>
#include <functional>

namespace latefusion {

/// Runs body(i) for i in [0, count) on up to `threads` worker threads.
/// Work is split into contiguous chunks; callers write results into
/// pre-sized slots so output order never depends on scheduling. The first
/// exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)> &body);

} // namespace latefusion
