#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mvpforge {

// Splits [0, n) into `workers` contiguous chunks and runs fn(chunk, begin, end)
// on each, one thread per chunk. The first exception thrown is rethrown.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, workers);
  const std::size_t chunks = std::min<std::size_t>(workers, std::max<std::size_t>(n, 1));
  if (chunks <= 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> threads;
  threads.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = n * c / chunks;
    const std::size_t end = n * (c + 1) / chunks;
    threads.emplace_back([&, c, begin, end] {
      try {
        fn(c, begin, end);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace mvpforge
