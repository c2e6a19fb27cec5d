#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wfspec {

namespace detail {
inline std::atomic<unsigned>& thread_limit_storage() {
  static std::atomic<unsigned> limit{0};
  return limit;
}
}  // namespace detail

/// Caps the number of worker threads used by the compute routines. 0 means
/// "use std::thread::hardware_concurrency()".
inline void set_thread_limit(unsigned n) { detail::thread_limit_storage() = n; }

inline unsigned thread_limit() {
  unsigned n = detail::thread_limit_storage().load();
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

/// Runs f(i) for i in [0, n) over contiguous blocks. Each index is visited by
/// exactly one worker, so callers that write only to slot i need no locking.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers = std::min<std::size_t>(thread_limit(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * block;
    const std::size_t end = std::min(n, begin + block);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Splits [0, n) into at most thread_limit() contiguous chunks and runs
/// f(worker, begin, end) for each; returns the number of chunks used so callers
/// can size per-worker buffers beforehand with worker_count(n).
inline std::size_t worker_count(std::size_t n) { return std::max<std::size_t>(1, std::min<std::size_t>(thread_limit(), n)); }

template <class F>
void parallel_chunks(std::size_t n, F&& f) {
  const std::size_t workers = worker_count(n);
  const std::size_t block = (n + workers - 1) / workers;
  parallel_for(workers, [&](std::size_t w) {
    const std::size_t begin = std::min(n, w * block);
    const std::size_t end = std::min(n, begin + block);
    f(w, begin, end);
  });
}

}  // namespace wfspec
