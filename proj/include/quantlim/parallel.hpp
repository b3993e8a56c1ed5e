#pragma once

#include <cstddef>
#include <functional>

namespace quantlim {

// Worker cap: QUANTLIM_THREADS when set (clamped to >= 1), otherwise the
// hardware concurrency.
int worker_count();

// Runs body(i) for i in [0, n). Indices are partitioned statically, so the
// result layout is deterministic; body must only write to per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace quantlim
