#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wishfx {

namespace detail {
inline std::atomic<int>& thread_cap() {
  static std::atomic<int> cap{0};  // 0 = hardware concurrency
  return cap;
}

inline bool& in_worker() {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

inline void set_num_threads(int n) { detail::thread_cap() = std::max(0, n); }

inline int num_threads() {
  const int cap = detail::thread_cap();
  if (cap > 0) return cap;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on up to num_threads() workers. Work is split
/// into contiguous chunks, so results written by index are order independent.
/// The first exception thrown by any worker is rethrown on the caller.
/// Nested calls from inside a worker run serially.
template <typename Fn>
void parallel_for(long n, const Fn& fn) {
  const int workers = detail::in_worker() ? 1 : static_cast<int>(std::min<long>(num_threads(), n));
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      detail::in_worker() = true;
      const long lo = n * w / workers, hi = n * (w + 1) / workers;
      try {
        for (long i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace wishfx
