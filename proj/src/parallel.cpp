#include "blochwave/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace blochwave::parallel {

namespace {
int g_threads = 1;
}

void set_num_threads(int n) { g_threads = n < 1 ? 1 : n; }
int num_threads() { return g_threads; }

std::size_t block_count(std::size_t total) {
  return (total + kBlock - 1) / kBlock;
}

void for_blocks(std::size_t total,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  const std::size_t nblocks = block_count(total);
  if (nblocks == 0) return;
  const int workers = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(g_threads), nblocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b) {
      const std::size_t begin = b * kBlock;
      fn(b, begin, std::min(begin + kBlock, total));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= nblocks) return;
      const std::size_t begin = b * kBlock;
      fn(b, begin, std::min(begin + kBlock, total));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

}  // namespace blochwave::parallel
