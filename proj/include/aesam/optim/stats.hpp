#pragma once

#include <cmath>

#include "aesam/errors.hpp"

namespace aesam {

/// Exponential moving estimate of the mean and variance of the squared
/// mini-batch gradient norm. `delta` is the forgetting rate.
struct GradNormStats {
  double mu = 0.0;
  double sigma2 = std::exp(-10.0);
  double delta = 0.9;

  double sigma() const { return std::sqrt(sigma2); }

  friend bool operator==(const GradNormStats&, const GradNormStats&) = default;
};

/// mu' = δ·mu + (1−δ)·g2, then sigma2' = δ·sigma2 + (1−δ)·(g2 − mu')².
/// The variance is centred on the already-updated mean.
inline GradNormStats ema_update(GradNormStats s, double g2) {
  const double d = s.delta;
  s.mu = d * s.mu + (1.0 - d) * g2;
  const double dev = g2 - s.mu;
  s.sigma2 = d * s.sigma2 + (1.0 - d) * dev * dev;
  return s;
}

} // namespace aesam
