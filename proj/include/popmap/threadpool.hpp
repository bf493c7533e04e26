#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace popmap {

// Static block partition of [0, n) over `threads` workers. Work items must
// write only caller-owned per-index slots; merging in index order is then
// independent of the thread count, which is what the determinism contract
// of the pipeline stages relies on.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (n == 0) return;
  const int nthreads = threads < 1 ? 1 : threads;
  if (nthreads == 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t chunk = (n + nthreads - 1) / static_cast<std::size_t>(nthreads);
  std::vector<std::thread> pool;
  for (int t = 0; t < nthreads; ++t) {
    const std::size_t b = std::min(n, static_cast<std::size_t>(t) * chunk);
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] {
      for (std::size_t i = b; i < e; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace popmap
