#pragma once

#include <cstddef>
#include <functional>

namespace latsep {

/// Worker count from LATSEP_THREADS; 0 or unset means hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Each index is
/// visited exactly once; callers write to disjoint outputs.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace latsep
