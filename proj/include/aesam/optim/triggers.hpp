#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "aesam/errors.hpp"
#include "aesam/optim/stats.hpp"

namespace aesam {

/// Sharp-region test: g2 ≥ mu + c·σ, σ being the EMA standard deviation.
inline bool sam_trigger(double g2, const GradNormStats& stats, double c) {
  return g2 >= stats.mu + c * std::sqrt(stats.sigma2);
}

/// Bernoulli(p) draw from the run's own stream.
template <typename Engine>
bool ss_sam_trigger(Engine& rng, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("ss_sam_trigger: p outside [0,1]");
  return std::bernoulli_distribution(p)(rng);
}

/// Every k-th step, starting at t = 0.
inline bool looksam_trigger(std::uint64_t t, std::uint64_t k) {
  if (k < 1) throw ConfigError("looksam_trigger: k must be >= 1");
  return t % k == 0;
}

} // namespace aesam
