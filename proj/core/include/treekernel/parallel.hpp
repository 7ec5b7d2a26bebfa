#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace treekernel {

// Runs fn(i) for every i in [begin, end) on up to num_threads workers
// (num_threads <= 0 picks the hardware count). Tasks must write only to
// disjoint preallocated slots so results do not depend on scheduling.
inline void parallel_for(int begin, int end, int num_threads,
                         const std::function<void(int)>& fn) {
  const int count = end - begin;
  if (count <= 0) return;
  if (num_threads <= 0) {
    num_threads = static_cast<int>(std::thread::hardware_concurrency());
  }
  num_threads = std::clamp(num_threads, 1, count);
  if (num_threads == 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }

  std::atomic<int> next(begin);
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= end) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(num_threads));
  for (int t = 0; t < num_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace treekernel
