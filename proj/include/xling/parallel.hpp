#pragma once

#include <cstddef>
#include <functional>

namespace xling {

/// Default worker count: XLING_THREADS if set to a positive integer,
/// otherwise the hardware concurrency (at least 1).
int default_thread_count();

/// Run fn(begin, end) over [0, n) split into fixed blocks of `block` items.
/// The partition depends only on n and block, never on the thread count, so
/// per-block results are reproducible for any `threads` value.
void parallel_for_blocks(std::size_t n, std::size_t block, int threads,
                         const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace xling
