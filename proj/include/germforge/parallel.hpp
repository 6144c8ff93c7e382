#pragma once

#include <cstddef>
#include <functional>

namespace germforge {

// Worker count: GERMFORGE_THREADS when set (values < 1 clamp to 1),
// otherwise the hardware concurrency.
int thread_count();

// Runs fn(i) for i in [0, n). Work is handed out in fixed index chunks, so a
// call whose fn writes only to slot i produces identical results for any
// worker count. fn must not throw; wrap and store failures per slot instead.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace germforge
