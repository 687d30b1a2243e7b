#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace trr::detail {

// Static index partition; workers write to disjoint slots, so results do
// not depend on the thread count.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace trr::detail
