#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace unlock {

// Resolves a requested worker count: explicit positive values win, otherwise
// the UNLOCK_JOBS environment variable, otherwise 1. Results never exceed
// what the hardware reports (when it reports anything).
inline int resolve_jobs(int requested) {
  int jobs = requested;
  if (jobs <= 0) {
    if (const char* env = std::getenv("UNLOCK_JOBS")) {
      jobs = std::atoi(env);
    }
  }
  if (jobs <= 0) {
    jobs = 1;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw > 0 && jobs > int(hw)) {
    jobs = int(hw);
  }
  return jobs;
}

// Runs fn(i) for i in [0, n). Work is handed out by an atomic counter so the
// schedule is dynamic, which is safe here because every call site writes to
// index-addressed slots and never depends on completion order. The first
// exception thrown by any worker is rethrown on the calling thread.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  jobs = resolve_jobs(jobs);
  if (n == 0) {
    return;
  }
  if (jobs <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  // Only the thread that wins the failed flag writes error, and it is read
  // after the joins, so no further synchronization is needed.
  std::exception_ptr error;

  auto worker = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) {
        return;
      }
      try {
        fn(i);
      } catch (...) {
        bool expected = false;
        if (failed.compare_exchange_strong(expected, true)) {
          error = std::current_exception();
        }
        return;
      }
    }
  };

  const std::size_t count = std::min(std::size_t(jobs), n);
  std::vector<std::thread> threads;
  threads.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    threads.emplace_back(worker);
  }
  for (std::thread& t : threads) {
    t.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

}  // namespace unlock
