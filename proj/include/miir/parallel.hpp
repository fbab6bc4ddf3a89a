#pragma once

#include <cstddef>
#include <functional>

namespace miir {

/// Runs fn(0..n-1) across at most `jobs` threads. Results must be written to
/// pre-sized per-index slots by the caller; the first exception thrown by any
/// worker is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace miir
