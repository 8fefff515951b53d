#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace svkit::detail {

/// Worker count from SVK_THREADS (default 1).
inline int thread_count() {
  const char* env = std::getenv("SVK_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return std::clamp(n, 1, 64);
}

/// Runs fn(i) for i in [0, n) over contiguous chunks. Results must be written to per-index slots so
/// that merging in index order is deterministic. The exception of the lowest failing chunk is rethrown.
template <class Fn>
void parallel_for(long n, Fn&& fn) {
  const int threads = static_cast<int>(std::min<long>(thread_count(), std::max<long>(n, 1)));
  if (threads <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  const long chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        const long hi = std::min(n, (t + 1) * chunk);
        for (long i = t * chunk; i < hi; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace svkit::detail
