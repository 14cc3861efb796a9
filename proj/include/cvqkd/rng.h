#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace cvqkd {

using Engine = std::mt19937_64;

// Independent named streams derived from the user seed. Each Monte Carlo stage
// draws from its own stream so adding a stage never perturbs another.
enum class Stream : std::uint64_t {
  kAlice = 1,
  kBob = 2,
  kMonitor = 3,
  kPartition = 4,
  kCalibration = 5,
  kTrial = 6,
};

// Pulses are generated in fixed-size blocks; block b of stream s always uses
// the same engine state, regardless of how blocks are assigned to threads.
inline constexpr std::size_t kBlockSize = std::size_t{1} << 16;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0) noexcept;

Engine make_engine(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

// Run fn(block_index, begin, end) over [0, n) split into kBlockSize blocks,
// using up to `threads` workers. Output must depend only on the block index.
template <class Fn>
void for_each_block(std::size_t n, unsigned threads, Fn&& fn);

}  // namespace cvqkd

#include "cvqkd/rng_impl.h"
