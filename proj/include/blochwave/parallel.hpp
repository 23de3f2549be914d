#pragma once

#include <cstddef>
#include <functional>

namespace blochwave::parallel {

/// Global worker count for data-parallel loops (default 1). Results are
/// bitwise independent of this setting: work is split into fixed-size
/// blocks with disjoint writes, and reductions sum per-block partials in
/// block order.
void set_num_threads(int n);
int num_threads();

constexpr std::size_t kBlock = 4096;

/// Invoke fn(block_index, begin, end) over [0,total) in blocks of kBlock.
void for_blocks(std::size_t total,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

/// Block count for a given total (for sizing partial-result arrays).
std::size_t block_count(std::size_t total);

}  // namespace blochwave::parallel
