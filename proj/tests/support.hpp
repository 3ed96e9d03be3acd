#pragma once

// Shared fixtures and independent reference computations for the test suites.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "aesam/adcore/tensor.hpp"
#include "aesam/harness/config.hpp"

namespace aesam {

inline void PrintTo(const Tensor& t, std::ostream* os) {
  *os << "Tensor[";
  for (std::size_t i = 0; i < t.rank(); ++i) *os << (i ? "x" : "") << t.dim(i);
  *os << "]{";
  for (std::size_t i = 0; i < t.size() && i < 8; ++i) *os << (i ? ", " : "") << t[i];
  *os << (t.size() > 8 ? ", ...}" : "}");
}

} // namespace aesam

namespace aesam::testing {

inline Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> n(0.0, scale);
  for (double& v : t.data()) v = n(rng);
  return t;
}

inline ParamSet random_like(const ParamSet& layout, std::mt19937_64& rng, double scale = 1.0) {
  ParamSet out;
  for (const auto& t : layout) out.push_back(random_tensor(t.shape(), rng, scale));
  return out;
}

inline ParamSet vec(std::vector<double> v) { return ParamSet{Tensor::vector(std::move(v))}; }

/// Plain recursion in a chosen precision, sharing no code with ema_update.
template <typename Real = long double>
struct EmaReference {
  Real mu = 0;
  Real sigma2 = std::exp(Real(-10));
  Real delta = Real(9) / Real(10);

  void push(Real g2) {
    mu = delta * mu + (1 - delta) * g2;
    const Real d = g2 - mu;
    sigma2 = delta * sigma2 + (1 - delta) * d * d;
  }
};

/// Small, fast MLP experiment for end-to-end tests.
inline ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.n = 220;
  c.n_test = 100;
  c.features = 4;
  c.classes = 3;
  c.hidden = {8};
  c.batch_size = 32;
  c.epochs = 3;
  c.seeds = {0};
  return c;
}

} // namespace aesam::testing
