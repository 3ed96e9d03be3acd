#pragma once

#include <cstdint>

#include "aesam/errors.hpp"

namespace aesam {

/// Linear threshold schedule from lambda2 (t = 0) to lambda1 (t = T).
struct ThresholdSchedule {
  double lambda1 = -1.0;
  double lambda2 = 1.0;
  std::uint64_t total_steps = 1;
};

inline double threshold_at(const ThresholdSchedule& s, std::uint64_t t) {
  if (s.total_steps == 0) throw ConfigError("threshold schedule: T must be positive");
  if (t > s.total_steps) throw ConfigError("threshold schedule: t outside [0, T]");
  const double frac = static_cast<double>(t) / static_cast<double>(s.total_steps);
  return frac * s.lambda1 + (1.0 - frac) * s.lambda2;
}

} // namespace aesam
