#pragma once

// Deterministic chunked parallel-for. Workers own disjoint index chunks and
// write into per-chunk slots, so results never depend on the worker count.

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace tbtrap {

inline void parallel_for(std::uint64_t count, int threads,
                         const std::function<void(std::uint64_t, std::uint64_t)>& body) {
  if (threads <= 1 || count < 2) {
    body(0, count);
    return;
  }
  int workers = int(std::min<std::uint64_t>(std::uint64_t(threads), count));
  std::vector<std::thread> pool;
  std::uint64_t chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::uint64_t lo = std::uint64_t(w) * chunk;
    std::uint64_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace tbtrap
