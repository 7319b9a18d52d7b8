#pragma once

#include <cstddef>
#include <functional>

namespace boostne {

/// Worker count: BOOSTNE_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t thread_count() noexcept;

/// Splits [begin, end) into contiguous blocks, one per worker, and calls
/// `body(block_begin, block_end)` for each. Results stay deterministic as long
/// as blocks write disjoint outputs; reductions belong to the caller.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_block = 64);

}  // namespace boostne
