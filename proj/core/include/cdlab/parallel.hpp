#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cdlab {

// Name of the environment variable that caps worker threads.
inline constexpr const char* kThreadCapVariable = "CDLAB_THREADS";

// Number of workers to use: the cap from the environment when set to a
// positive integer, otherwise the hardware concurrency (at least 1).
std::size_t worker_limit();

// Calls body(i) for i in [0, count) on up to worker_limit() threads. Results
// must be written to slot i by the caller, which keeps output order fixed.
// The exception thrown by the lowest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const std::size_t workers = std::min(worker_limit(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex guard;
  std::size_t failed_index = count;
  std::exception_ptr failure;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(guard);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace cdlab
