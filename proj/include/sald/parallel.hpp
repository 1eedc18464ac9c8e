#pragma once

#include <cstddef>
#include <functional>

namespace sald {

/// Worker count from SALD_THREADS (default: hardware concurrency, at least 1).
std::size_t thread_count();

/// Runs task(i) for i in [0, n) on up to thread_count() threads. Tasks must
/// write to disjoint outputs; callers combine results in index order so the
/// outcome does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

}  // namespace sald
