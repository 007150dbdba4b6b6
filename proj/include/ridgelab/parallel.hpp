#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ridgelab {

/// Number of worker threads used by parallel_for. Defaults to the hardware
/// concurrency, or RIDGELAB_THREADS when set.
std::size_t worker_count();
void set_worker_count(std::size_t count);

/// Calls body(i) for every i in [0, count). Each index is handled exactly once;
/// callers write results into per-index slots, so the output never depends on
/// the schedule. The first exception thrown by any body is rethrown.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

/// Splits [0, count) into fixed contiguous chunks whose boundaries depend only
/// on count, never on the thread count.
struct ChunkPlan {
  std::size_t count;
  std::size_t chunks;
  std::size_t begin(std::size_t c) const { return c * count / chunks; }
  std::size_t end(std::size_t c) const { return (c + 1) * count / chunks; }
};

inline ChunkPlan plan_chunks(std::size_t count, std::size_t max_chunks = 64) {
  return {count, std::max<std::size_t>(1, std::min(count, max_chunks))};
}

}  // namespace ridgelab
