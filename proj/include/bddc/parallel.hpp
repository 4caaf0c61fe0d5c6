#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace bddc {

/// Number of worker threads used by the experiment drivers.
inline int default_thread_count() {
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates fn(0..n-1) on a small pool and returns results in index order.
/// Work items must be independent (each owns its seed stream), so the result
/// does not depend on the thread count.
template <typename Result>
std::vector<Result> parallel_map(int n, const std::function<Result(int)>& fn,
                                 int threads = default_thread_count()) {
  std::vector<Result> out(n);
  threads = std::clamp(threads, 1, std::max(1, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace bddc
