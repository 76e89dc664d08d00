#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hoslab {

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index
/// is handled exactly once and results must be written to per-index slots,
/// so the outcome does not depend on the worker count. The first exception
/// thrown by any body is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t count, int workers, Body&& body)
{
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      const std::size_t begin = count * t / threads;
      const std::size_t end = count * (t + 1) / threads;
      try {
        for (std::size_t i = begin; i < end; ++i)
          body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool)
    th.join();
  if (failure)
    std::rethrow_exception(failure);
}

/// Default worker count: hardware concurrency, at least 1.
inline int default_workers()
{
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace hoslab
