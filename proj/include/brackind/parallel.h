#ifndef BRACKIND_PARALLEL_H_
#define BRACKIND_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace brackind {

// Runs fn(index) for index in [0, count) on up to `threads` workers. Indices
// are statically partitioned; results must be written to per-index slots so
// reductions can happen afterwards in index order. The first exception thrown
// by any worker is rethrown.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace brackind

#endif  // BRACKIND_PARALLEL_H_
