#pragma once
// Static-partition parallel loop over [0, n). Each index runs exactly once, so
// results are independent of the thread count when bodies write disjoint slots.

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace tweetlens::detail {

template <typename F>
void parallel_for(std::size_t n, F&& body, std::size_t min_chunk = 64) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t threads = std::min(hw, (n + min_chunk - 1) / std::max<std::size_t>(min_chunk, 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace tweetlens::detail
