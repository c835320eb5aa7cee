#pragma once

#include <cstddef>
#include <functional>

namespace nfim {

/// Worker count used by every estimator. 0 or 1 runs inline.
void set_num_threads(int n);
int num_threads();

/// Calls body(i) for i in [0, n), split into contiguous blocks across workers.
/// Bodies write to disjoint per-index slots; callers reduce afterwards in index
/// order so results do not depend on the worker count. The first exception
/// thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace nfim
