#pragma once

#include <concepts>
#include <span>

#include "aesam/adcore/tensor.hpp"

namespace aesam {

/// Loss and gradient of a mini-batch objective at one parameter point.
struct Evaluation {
  double loss = 0.0;
  ParamSet grad;
};

/// Anything the optimizer can differentiate: evaluate(w, batch indices).
/// Full-batch objectives (analytic landscapes) ignore the batch.
template <typename O>
concept Objective = requires(const O& o, const ParamSet& w, std::span<const std::size_t> batch) {
  { o.evaluate(w, batch) } -> std::convertible_to<Evaluation>;
};

} // namespace aesam
