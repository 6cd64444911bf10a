#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

#include "mdev/rng.hpp"

namespace mdev {

// Runs fn(chunk_index) for every chunk, possibly across threads, storing
// results by index. The caller reduces in index order, so the outcome is
// identical for every worker count.
template <typename Result, typename Fn>
std::vector<Result> run_chunks(std::size_t n_chunks, Fn fn) {
  std::vector<Result> results(n_chunks);
  int workers = max_threads();
  if (workers <= 1 || n_chunks <= 1) {
    for (std::size_t i = 0; i < n_chunks; ++i) results[i] = fn(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n_chunks) return;
      results[i] = fn(i);
    }
  };
  std::vector<std::thread> pool;
  int t = std::min<std::size_t>(workers, n_chunks);
  pool.reserve(t);
  for (int i = 0; i < t; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return results;
}

}  // namespace mdev
