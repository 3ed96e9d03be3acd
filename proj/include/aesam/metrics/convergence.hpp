#pragma once

#include <algorithm>
#include <span>

#include "aesam/errors.hpp"

namespace aesam {

/// True iff the running minimum of the per-epoch full-gradient norms has
/// fallen to `fraction` of the first measurement or below.
inline bool convergence_trend(std::span<const double> epoch_full_grad_norms, double fraction = 0.1) {
  if (epoch_full_grad_norms.size() < 5)
    throw InsufficientDataError("convergence_trend: need at least 5 epochs");
  const double running_min = *std::min_element(epoch_full_grad_norms.begin(), epoch_full_grad_norms.end());
  return running_min <= fraction * epoch_full_grad_norms.front();
}

} // namespace aesam
