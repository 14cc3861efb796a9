#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace cvqkd {

template <class Fn>
void for_each_block(std::size_t n, unsigned threads, Fn&& fn) {
  const std::size_t blocks = (n + kBlockSize - 1) / kBlockSize;
  auto run = [&](std::size_t b) {
    const std::size_t begin = b * kBlockSize;
    fn(b, begin, std::min(n, begin + kBlockSize));
  };
  if (threads <= 1 || blocks <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run(b);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, blocks);
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t b = w; b < blocks; b += workers) run(b);
    });
  }
}

}  // namespace cvqkd
