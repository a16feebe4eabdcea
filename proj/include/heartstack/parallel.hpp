#pragma once

#include <cstddef>
#include <functional>

namespace heartstack {

/// Runs body(i) for i in [0, n) on a small worker pool. Nested calls run
/// sequentially on the calling thread. Callers must make each body(i)
/// independent of scheduling (own output slot, own RNG stream).
///
/// Worker count: HEARTSTACK_THREADS if set, otherwise hardware concurrency.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

std::size_t worker_count();

}  // namespace heartstack
