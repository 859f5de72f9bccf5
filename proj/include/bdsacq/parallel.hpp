#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bdsacq {

/// Runs body(worker, index) for index in [0, count) on up to `jobs` threads.
///
/// Indices are striped over workers (worker w takes w, w + jobs, ...), so a
/// caller writing result[index] gets output independent of thread count. The
/// first exception thrown by any worker is rethrown after all threads join.
template <typename Body>
void parallel_for(std::size_t count, int jobs, Body&& body) {
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1,
                                                      std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(std::size_t{0}, i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) body(w, i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

inline std::size_t worker_count(std::size_t count, int jobs) {
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1,
                                 std::max<std::size_t>(count, 1));
}

}  // namespace bdsacq
