#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace cpgeo {

// Splits [0, n) into contiguous chunks, one per worker, and runs
// fn(begin, end, chunk) on each. The first exception thrown is rethrown.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned workers, Fn&& fn) {
  const std::size_t chunks = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (chunks == 1) {
    fn(std::size_t{0}, n, std::size_t{0});
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::jthread> threads;
  threads.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = n * c / chunks;
    const std::size_t end = n * (c + 1) / chunks;
    threads.emplace_back([&, begin, end, c] {
      try {
        fn(begin, end, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  threads.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Runs fn(i) for every i in [0, n) across workers.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace cpgeo
