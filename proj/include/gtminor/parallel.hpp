#pragma once

/**
 * @file parallel.hpp
 * @brief Bounded worker pool over replica indices. Workers pull the next
 * index from a shared counter; each result lands in its own slot, so the
 * merged output is in replica order whatever the schedule was.
 */

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace gtminor {

/// Default observer for the simulators' per-event and per-step hooks.
struct NoObserver {
  template <class... A>
  void operator()(const A&...) const {}
};

inline constexpr const char* kWorkersEnv = "GTMINOR_WORKERS";

/// Worker count: explicit request if positive, else GTMINOR_WORKERS, else hardware concurrency.
inline int resolve_workers(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const int w = std::stoi(env);
      if (w > 0) return w;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(i) for i in [0, count) on `workers` threads; rethrows the first exception.
template <class Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
  workers = std::max(1, std::min<int>(workers, int(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Runs f(i) for every replica and returns the results indexed by replica.
template <class F>
auto map_replicas(std::size_t count, int workers, F&& f) {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out(count);
  parallel_for(count, workers, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

}  // namespace gtminor
