// parallel.hpp - tiny index-parallel loop. Each index writes its own output
// slot, so results do not depend on the thread count.

#pragma once

#include <cstddef>
#include <functional>

namespace acnum {

/// Threads to use: ACNUM_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
unsigned worker_count();

/// Runs body(i) for i in [0, count). Exceptions are rethrown on the caller
/// (the one with the smallest index wins).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace acnum
