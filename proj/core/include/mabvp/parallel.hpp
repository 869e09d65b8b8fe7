#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mabvp {

/// Runs body(i) for i in [0, n) on up to `threads` threads using contiguous
/// chunks. Results must be written per index so the output does not depend on
/// the thread count. The first exception thrown by any worker is rethrown.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  const std::size_t t = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(t);
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (std::size_t w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w * n / t; i < (w + 1) * n / t; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mabvp
