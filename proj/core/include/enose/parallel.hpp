#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace enose {

// Worker count: ENOSE_THREADS env var if set, else hardware concurrency.
inline std::size_t default_thread_count() {
  if (const char* env = std::getenv("ENOSE_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<std::size_t>(n);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

// Runs fn(worker, lo, hi) over contiguous blocks of [0, n), one block per
// worker thread. Callers own determinism: results must land in per-index
// slots and any reduction happens afterwards in index order.
template <class F>
void parallel_for_blocks(std::size_t n, F&& fn,
                         std::size_t n_threads = default_thread_count()) {
  n_threads = std::min(n_threads, n);
  if (n_threads <= 1) {
    if (n > 0) fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(n_threads);
  const std::size_t chunk = (n + n_threads - 1) / n_threads;
  for (std::size_t w = 0; w < n_threads; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([&, w, lo, hi] {
      try {
        fn(w, lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Runs fn(i) for i in [0, n); convenience wrapper over parallel_for_blocks.
template <class F>
void parallel_for(std::size_t n, F&& fn, std::size_t n_threads = default_thread_count()) {
  parallel_for_blocks(
      n,
      [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      },
      n_threads);
}

}  // namespace enose
