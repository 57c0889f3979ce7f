#pragma once

#include <functional>

namespace covlearn {

/// Worker count resolution: the COVLEARN_THREADS environment variable wins,
/// then a positive requested value, then hardware concurrency. Always >= 1.
int resolve_threads(int requested);

/// Runs fn(0..n-1) on up to `threads` workers. Work items must write to
/// disjoint, pre-assigned slots; completion order carries no information, so
/// results stay deterministic. Serial when threads <= 1. Exceptions from
/// workers are captured and rethrown on the calling thread.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace covlearn
