#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace conservolast {

/// Worker count: hardware concurrency, capped by CONSERVOLAST_THREADS.
int thread_count();

/// Runs body(i) for i in [0, n). Work is split into contiguous blocks, so
/// callers that write results by index get deterministic output. The first
/// exception thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace conservolast
