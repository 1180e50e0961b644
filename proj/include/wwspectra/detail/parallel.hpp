#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace ww {

/// Worker-count hint passed down from the caller. Results never depend on it:
/// every task writes only its own output slot.
struct Parallelism {
  unsigned threads = 1;

  static Parallelism from_env(unsigned fallback = 1) {
    if (const char* v = std::getenv("WW_SPECTRA_THREADS")) {
      try {
        const long n = std::stol(v);
        if (n > 0) return {static_cast<unsigned>(n)};
      } catch (...) {
      }
    }
    return {fallback};
  }
};

namespace detail {

template <class Fn>
void parallel_for(std::size_t count, Parallelism par, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, par.threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail
}  // namespace ww
