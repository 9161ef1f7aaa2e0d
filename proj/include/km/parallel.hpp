#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace km {

// Runs fn(i) for i in [0, n) across up to `threads` std::threads, contiguous
// blocks per thread.  Tasks must write only to their own slots; results are
// then independent of the thread count.  The first exception is rethrown.
inline void parallel_for(int n, int threads,
                         const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int t = std::min(threads, n);
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex err_mu;
  pool.reserve(t);
  for (int w = 0; w < t; ++w) {
    const int lo = static_cast<int>(static_cast<long long>(n) * w / t);
    const int hi = static_cast<int>(static_cast<long long>(n) * (w + 1) / t);
    pool.emplace_back([&, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace km
