// parallel.hpp — Deterministic sample-level parallelism.
//
// Workers pull indices from a shared counter and write into per-index
// slots; reductions happen sequentially afterwards, so the result is
// bit-identical for any worker count. DECOUPLER_THREADS caps the pool.

#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace decoupler {

inline int thread_budget() {
  int n = int(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("DECOUPLER_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) n = int(v);
  }
  return n;
}

// Runs fn(i) for i in [0, count). fn must only touch slot i of any shared
// output. Exceptions are captured and rethrown on the caller thread.
template <typename Fn>
void parallel_for(std::int64_t count, Fn&& fn) {
  const int workers = std::min<std::int64_t>(thread_budget(), count);
  if (workers <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::int64_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace decoupler
