#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <numeric>
#include <random>
#include <vector>

#include "aesam/adcore/tensor.hpp"
#include "aesam/errors.hpp"
#include "aesam/models/batching.hpp"
#include "aesam/models/objective.hpp"

namespace aesam {

enum class BatchSampling { independent, epoch_partition };

/// Gradient-noise estimate at a fixed parameter point.
///
/// `variance` is the norm-difference form E‖g_B‖² − ‖g_D‖²; `direct_variance`
/// is the sampled mean of ‖g_B − g_D‖². The two agree in expectation for
/// unbiased batch sampling.
struct VarianceReport {
  std::size_t n_batches = 0;
  double mean_batch_sq_norm = 0.0;
  double full_sq_norm = 0.0;
  double variance = 0.0;
  double direct_variance = 0.0;
  /// Monte-Carlo standard error of direct_variance (sample sd of the
  /// per-batch squared deviations over √n).
  double standard_error = 0.0;

  double discrepancy() const { return std::abs(direct_variance - variance); }
  bool agrees(double n_se = 2.0) const { return discrepancy() <= n_se * standard_error; }
};

namespace detail {

/// `count` batches, each a uniform random b-subset of [0, n), independent
/// across batches.
inline std::vector<std::vector<std::size_t>> sample_batches(std::size_t n, std::size_t b,
                                                            std::size_t count,
                                                            std::uint64_t seed) {
  if (b < 1 || b > n) throw ConfigError("batch size must be in [1, dataset size]");
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> out(count);
  for (auto& batch : out) {
    batch.reserve(b);
    std::sample(all.begin(), all.end(), std::back_inserter(batch), b, rng);
  }
  return out;
}

/// Batches drawn the way training draws them: consecutive seeded
/// shuffle-and-partition epochs, keeping only full-size batches. Each batch is
/// marginally a uniform b-subset, as with sample_batches, but within an epoch
/// the batches are disjoint.
inline std::vector<std::vector<std::size_t>> partition_batches(std::size_t n, std::size_t b,
                                                               std::size_t count,
                                                               std::uint64_t seed) {
  if (b < 1 || b > n) throw ConfigError("batch size must be in [1, dataset size]");
  std::vector<std::vector<std::size_t>> out;
  out.reserve(count);
  for (std::uint64_t epoch = 0; out.size() < count; ++epoch)
    for (auto& batch : minibatch_iter(n, b, seed, epoch)) {
      if (batch.size() != b) continue;
      out.push_back(std::move(batch));
      if (out.size() == count) break;
    }
  return out;
}

inline std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

} // namespace detail

/// ‖∇L(D;w)‖² over all `n_examples` rows.
template <Objective O>
double full_grad_norm(const O& objective, const ParamSet& w, std::size_t n_examples) {
  const auto all = detail::iota_indices(n_examples);
  return tensor_ops::squared_norm(objective.evaluate(w, all).grad);
}

/// `n` squared mini-batch gradient norms at fixed `w`.
template <Objective O>
std::vector<double> sample_grad_norms(const O& objective, const ParamSet& w, std::size_t n_examples,
                                      std::size_t b, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw InsufficientDataError("sample_grad_norms: need n >= 2");
  std::vector<double> out;
  out.reserve(n);
  for (const auto& batch : detail::sample_batches(n_examples, b, n, seed))
    out.push_back(tensor_ops::squared_norm(objective.evaluate(w, batch).grad));
  return out;
}

template <Objective O>
VarianceReport gradient_variance(const O& objective, const ParamSet& w, std::size_t n_examples,
                                 std::size_t b, std::size_t n_batches, std::uint64_t seed,
                                 BatchSampling sampling = BatchSampling::epoch_partition) {
  if (n_batches < 2) throw InsufficientDataError("gradient_variance: need at least 2 batches");
  const auto all = detail::iota_indices(n_examples);
  const ParamSet full = objective.evaluate(w, all).grad;

  VarianceReport r;
  r.n_batches = n_batches;
  r.full_sq_norm = tensor_ops::squared_norm(full);

  std::vector<double> dev(n_batches);
  double sum_sq = 0.0;
  std::size_t i = 0;
  const auto batches = sampling == BatchSampling::epoch_partition
                           ? detail::partition_batches(n_examples, b, n_batches, seed)
                           : detail::sample_batches(n_examples, b, n_batches, seed);
  for (const auto& batch : batches) {
    const ParamSet g = objective.evaluate(w, batch).grad;
    sum_sq += tensor_ops::squared_norm(g);
    dev[i++] = tensor_ops::squared_norm(tensor_ops::add_scaled(g, -1.0, full));
  }
  const auto n = static_cast<double>(n_batches);
  r.mean_batch_sq_norm = sum_sq / n;
  r.variance = r.mean_batch_sq_norm - r.full_sq_norm;

  const double mean_dev = std::accumulate(dev.begin(), dev.end(), 0.0) / n;
  double ss = 0.0;
  for (double d : dev) ss += (d - mean_dev) * (d - mean_dev);
  r.direct_variance = mean_dev;
  r.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return r;
}

} // namespace aesam
