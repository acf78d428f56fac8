#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace eqmag {

/// Process-wide worker count; 0 means hardware concurrency.
void set_num_threads(int n);
int num_threads();

/// Runs f(i) for i in [0, n). Work is handed out dynamically, so callers must
/// write results only to per-index slots; reductions happen afterwards in
/// index order, which keeps results independent of the thread count. The
/// first exception thrown by any f(i) is rethrown.
template <class F>
void parallel_for(int n, F&& f) {
  const int nt = std::min(num_threads(), n);
  if (nt <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nt - 1);
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace eqmag
