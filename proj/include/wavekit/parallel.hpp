#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace wavekit {

// Runs fn(i) for i in [0, count) on up to `threads` workers. Exceptions are
// captured per index and the lowest-index one is rethrown after the join, so
// error reporting does not depend on scheduling.
inline void parallel_for(long count, int threads, const std::function<void(long)>& fn) {
  if (count <= 0) return;
  if (threads < 1) threads = 1;
  const int used = static_cast<int>(std::min<long>(threads, count));
  if (used == 1) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(used));
  for (int t = 0; t < used; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const long i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace wavekit
