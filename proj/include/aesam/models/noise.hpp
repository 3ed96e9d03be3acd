#pragma once

#include <cstdint>
#include <random>

#include "aesam/errors.hpp"
#include "aesam/models/dataset.hpp"

namespace aesam {

struct NoiseSpec {
  double flip_probability = 0.0;
  std::uint64_t seed = 0;
};

/// Each label is independently replaced, with probability p, by a uniformly
/// drawn different class. Features are never touched.
inline LabeledDataset inject_label_noise(const LabeledDataset& ds, const NoiseSpec& spec) {
  const double p = spec.flip_probability;
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("inject_label_noise: p outside [0,1]");
  if (ds.classes < 2) throw ConfigError("inject_label_noise: need at least 2 classes");

  LabeledDataset out = ds;
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution flip(p);
  std::uniform_int_distribution<int> other(0, static_cast<int>(ds.classes) - 2);
  for (int& y : out.labels) {
    if (!flip(rng)) continue;
    const int r = other(rng);
    y = r < y ? r : r + 1;
  }
  return out;
}

} // namespace aesam
