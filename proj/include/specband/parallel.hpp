#pragma once

#include <cstddef>
#include <functional>

namespace specband {

/// Worker cap from SPECBAND_THREADS (default 1; invalid values count as 1).
unsigned configured_threads();

/// Calls fn(begin, end) over contiguous disjoint chunks of [0, n) on up to
/// `threads` workers and waits for all of them. The first exception thrown by
/// any chunk is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace specband
