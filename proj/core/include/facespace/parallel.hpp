#pragma once

#include <cstddef>
#include <functional>

namespace facespace {

/// Worker count used by parallel_for; defaults to hardware concurrency.
/// Setting 1 runs everything on the calling thread.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Calls body(begin, end) on contiguous, disjoint chunks covering [0, n).
/// Chunk boundaries depend only on n and the thread count; callers that need
/// bitwise-reproducible results write into per-index slots and reduce
/// sequentially afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace facespace
