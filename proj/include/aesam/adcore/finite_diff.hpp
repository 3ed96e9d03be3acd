#pragma once

#include <concepts>

#include "aesam/adcore/tensor.hpp"
#include "aesam/errors.hpp"

namespace aesam {

/// Central-difference gradient oracle: (f(w+h·e_i) − f(w−h·e_i)) / 2h per
/// coordinate. Independent of the tape; used to verify it.
template <typename F>
  requires std::invocable<const F&, const ParamSet&>
ParamSet finite_diff_grad(const F& loss, const ParamSet& w, double h = 1e-5) {
  if (!(h > 0.0)) throw ConfigError("finite_diff_grad: h must be positive");
  ParamSet grad = tensor_ops::zeros_like(w);
  ParamSet probe = w;
  for (std::size_t t = 0; t < w.size(); ++t)
    for (std::size_t i = 0; i < w[t].size(); ++i) {
      const double orig = w[t][i];
      probe[t][i] = orig + h;
      const double up = loss(probe);
      probe[t][i] = orig - h;
      const double down = loss(probe);
      probe[t][i] = orig;
      grad[t][i] = (up - down) / (2.0 * h);
    }
  return grad;
}

} // namespace aesam
