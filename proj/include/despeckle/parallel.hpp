#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace despeckle {

/// Environment variable consulted for the default worker cap when
/// set_num_threads() has not been called (or was called with 0).
inline constexpr const char* kThreadsEnvVar = "DESPECKLE_NUM_THREADS";

/// Caps the number of worker threads used by the filters. 0 restores the
/// default (environment variable, else hardware concurrency).
void set_num_threads(int n);

/// Effective worker count, always >= 1.
int num_threads();

/// Splits [0, rows) into contiguous blocks and runs fn(begin, end) on each
/// block concurrently. Every row is processed by exactly one call, so as long
/// as fn writes only to its own rows the result does not depend on the
/// thread count.
template <typename Fn>
void parallel_rows(std::ptrdiff_t rows, Fn&& fn) {
  if (rows <= 0) return;
  const std::ptrdiff_t workers =
      std::min<std::ptrdiff_t>(num_threads(), rows);
  if (workers <= 1) {
    fn(std::ptrdiff_t{0}, rows);
    return;
  }

  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const std::ptrdiff_t block = (rows + workers - 1) / workers;
  for (std::ptrdiff_t w = 0; w < workers; ++w) {
    const std::ptrdiff_t begin = w * block;
    const std::ptrdiff_t end = std::min(rows, begin + block);
    if (begin >= end) break;
    pool.emplace_back([&fn, &errors, w, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace despeckle
