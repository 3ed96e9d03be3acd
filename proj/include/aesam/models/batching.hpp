#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "aesam/errors.hpp"

namespace aesam {

using Batch = std::vector<std::size_t>;

/// One epoch of mini-batches: a seeded shuffle of [0, n) cut into chunks of
/// `batch_size` (the last chunk may be shorter). Same (seed, epoch), same batches.
inline std::vector<Batch> minibatch_iter(std::size_t n, std::size_t batch_size,
                                         std::uint64_t seed, std::uint64_t epoch) {
  if (batch_size < 1) throw ConfigError("minibatch_iter: batch size must be >= 1");
  if (batch_size > n) throw ConfigError("minibatch_iter: batch size exceeds dataset size");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Batch> batches;
  batches.reserve((n + batch_size - 1) / batch_size);
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return batches;
}

inline std::size_t batches_per_epoch(std::size_t n, std::size_t batch_size) {
  return (n + batch_size - 1) / batch_size;
}

} // namespace aesam
