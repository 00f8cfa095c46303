#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace slowbond {

/// Thread count: `requested` if positive, else SLOWBOND_THREADS, else the
/// hardware concurrency (at least 1).
std::size_t resolve_threads(std::size_t requested = 0);

/// Evaluates f(i) for i < count on up to `threads` workers and returns the
/// results in index order, so reductions over them are deterministic.
template <class R, class F>
std::vector<R> parallel_map(std::size_t count, std::size_t threads, F&& f) {
  std::vector<R> out(count);
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace slowbond
