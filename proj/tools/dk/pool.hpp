#pragma once

// Fixed-size worker pool mapping an index range onto results in index order.

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace dkcli {

inline int worker_count(int requested, std::size_t tasks) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(1, n);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(tasks, 1)));
}

/// Runs fn(i) for i in [0, n) on `threads` workers. If tasks throw, the
/// exception of the lowest failing index is rethrown after all workers stop.
template <class R>
std::vector<R> parallel_map(std::size_t n, int threads, const std::function<R(std::size_t)>& fn) {
  std::vector<R> out(n);
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t fail_index = n;
  std::exception_ptr fail;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < fail_index) {
          fail_index = i;
          fail = std::current_exception();
        }
      }
    }
  };
  const int w = worker_count(threads, n);
  std::vector<std::thread> pool;
  for (int k = 1; k < w; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (fail) std::rethrow_exception(fail);
  return out;
}

}  // namespace dkcli
