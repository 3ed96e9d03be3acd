#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "aesam/errors.hpp"
#include "aesam/harness/config.hpp"
#include "aesam/metrics/gradient_stats.hpp"
#include "aesam/models/batching.hpp"
#include "aesam/models/dataset.hpp"
#include "aesam/models/landscape.hpp"
#include "aesam/models/mlp.hpp"
#include "aesam/models/noise.hpp"
#include "aesam/optim/optimizer.hpp"

namespace aesam {

/// Independent per-purpose streams derived from one run seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose) {
  std::uint64_t s = seed * 0x9e3779b97f4a7c15ull + purpose * 0xd1b54a32d192ed03ull + 0x2545f4914f6cdd1dull;
  s = (s ^ (s >> 30)) * 0xbf58476d1ce4e5b9ull;
  s = (s ^ (s >> 27)) * 0x94d049bb133111ebull;
  return s ^ (s >> 31);
}

namespace seed_purpose {
inline constexpr std::uint64_t init = 1, batches = 2, noise = 3, optimizer = 4, diagnostics = 5;
}

/// FNV-1a over the label sequence.
inline std::uint64_t label_checksum(const std::vector<int>& labels) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (int y : labels) {
    auto v = static_cast<std::uint32_t>(y);
    for (int i = 0; i < 4; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

struct DataSplits {
  LabeledDataset train;       // possibly noisy
  LabeledDataset validation;  // clean
  LabeledDataset test;        // clean
  std::size_t flipped = 0;
};

/// Pool → (test, validation, train) by a data_seed permutation; label noise is
/// applied to the training split only.
inline DataSplits prepare_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  LabeledDataset pool;
  const std::size_t need = cfg.n + cfg.n_test;
  if (cfg.dataset == DatasetKind::file) {
    pool = read_dataset_csv(cfg.dataset_path);
    if (pool.dim != cfg.input_width() || pool.classes != cfg.output_width())
      throw ConfigError("dataset file shape does not match config features/classes");
    if (pool.size() < need) throw ConfigError("dataset file has fewer rows than n + n_test");
  } else {
    DatasetOptions opt;
    opt.dim = cfg.features;
    opt.classes = cfg.classes;
    opt.cluster_std = cfg.cluster_std;
    opt.center_scale = cfg.center_scale;
    pool = make_dataset(cfg.dataset, need, cfg.data_seed, opt);
  }

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(derive_seed(cfg.data_seed, 0));
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t n_val = cfg.n - cfg.train_size();
  const auto at = [&](std::size_t off) { return order.begin() + static_cast<std::ptrdiff_t>(off); };
  const std::vector<std::size_t> test_idx(at(0), at(cfg.n_test));
  const std::vector<std::size_t> val_idx(at(cfg.n_test), at(cfg.n_test + n_val));
  const std::vector<std::size_t> train_idx(at(cfg.n_test + n_val), at(need));

  DataSplits s;
  s.test = pool.subset(test_idx);
  s.validation = pool.subset(val_idx);
  s.train = pool.subset(train_idx);
  if (cfg.noise > 0.0) {
    const LabeledDataset clean = s.train;
    s.train = inject_label_noise(clean, NoiseSpec{cfg.noise, derive_seed(seed, seed_purpose::noise)});
    for (std::size_t i = 0; i < clean.size(); ++i) s.flipped += clean.labels[i] != s.train.labels[i];
  }
  return s;
}

inline AnalyticLandscape make_landscape(const ExperimentConfig& cfg) {
  switch (cfg.landscape) {
  case LandscapeKind::quadratic: return AnalyticLandscape::quadratic(cfg.landscape_dim);
  case LandscapeKind::scaled_quadratic: {
    std::vector<double> diag(cfg.landscape_dim);
    for (std::size_t i = 0; i < diag.size(); ++i)
      diag[i] = 1.0 + 3.0 * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(1, diag.size() - 1));
    return AnalyticLandscape::scaled_quadratic(diag);
  }
  case LandscapeKind::nonconvex_wells: return AnalyticLandscape::nonconvex_wells(cfg.landscape_dim);
  }
  throw ConfigError("unknown landscape");
}

struct EpochMetrics {
  std::uint64_t epoch = 0;  // 1-based, measured after the epoch's last step
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  double full_grad_norm_sq = 0.0;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct RunRecord {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::uint64_t total_steps = 0;     // T as configured
  std::uint64_t steps_taken = 0;     // < T only if diverged
  std::uint64_t sam_steps = 0;
  std::uint64_t grad_evals = 0;
  double sam_percent = 0.0;
  double zeta = 0.0;
  std::vector<StepTrace> traces;     // every step, or every thin_every-th above thin_threshold
  std::vector<EpochMetrics> epochs;
  std::vector<double> norm_samples;  // end-of-run squared-norm samples (diag_samples > 0)
  ParamSet final_weights;
  std::uint64_t test_label_checksum = 0;
  std::size_t flipped_labels = 0;
  bool diverged = false;
  bool failed = false;
  std::string error;
  double wall_clock_seconds = 0.0;

  bool ok() const noexcept { return !diverged && !failed; }
  double final_train_accuracy() const { return epochs.empty() ? std::nan("") : epochs.back().train_accuracy; }
  double final_test_accuracy() const { return epochs.empty() ? std::nan("") : epochs.back().test_accuracy; }

  /// Field-wise equality except wall-clock time.
  friend bool operator==(const RunRecord& a, const RunRecord& b) {
    return a.config == b.config && a.seed == b.seed && a.total_steps == b.total_steps &&
           a.steps_taken == b.steps_taken && a.sam_steps == b.sam_steps &&
           a.grad_evals == b.grad_evals && a.sam_percent == b.sam_percent && a.zeta == b.zeta &&
           a.traces == b.traces && a.epochs == b.epochs && a.norm_samples == b.norm_samples &&
           a.final_weights == b.final_weights && a.test_label_checksum == b.test_label_checksum &&
           a.flipped_labels == b.flipped_labels && a.diverged == b.diverged &&
           a.failed == b.failed && a.error == b.error;
  }
};

namespace detail {

template <Objective O, typename BatchSource, typename EpochEval>
void train_loop(RunRecord& rec, Optimizer& opt, ParamSet& w, const O& objective,
                BatchSource&& batches_for_epoch, EpochEval&& eval_epoch) {
  const auto& cfg = rec.config;
  const bool thin = rec.total_steps > cfg.thin_threshold;
  try {
    for (std::uint64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      for (const auto& batch : batches_for_epoch(epoch)) {
        StepTrace tr = opt.step(w, objective, batch);
        if (!thin || tr.t % cfg.thin_every == 0) rec.traces.push_back(tr);
      }
      EpochMetrics m = eval_epoch(w);
      m.epoch = epoch + 1;
      rec.epochs.push_back(m);
    }
  } catch (const NumericError& e) {
    rec.diverged = true;
    rec.error = e.what();
  }
  rec.steps_taken = opt.t();
  rec.sam_steps = opt.sam_steps();
  rec.grad_evals = opt.grad_evals();
  if (rec.steps_taken > 0) {
    rec.zeta = static_cast<double>(rec.sam_steps) / static_cast<double>(rec.steps_taken);
    rec.sam_percent = 100.0 * static_cast<double>(rec.sam_steps) / static_cast<double>(rec.steps_taken);
  }
}

} // namespace detail

/// Train for T = epochs × batches-per-epoch steps and evaluate on the clean
/// splits after every epoch. Deterministic in (config, seed). A non-finite
/// loss or gradient stops the run with diverged = true and partial traces.
inline RunRecord run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  cfg.validate();
  RunRecord rec;
  rec.config = cfg;
  rec.seed = seed;
  rec.total_steps = cfg.total_steps();
  Optimizer opt(cfg.optimizer_config(derive_seed(seed, seed_purpose::optimizer)));

  if (cfg.model == ModelKind::mlp) {
    const DataSplits data = prepare_data(cfg, seed);
    rec.test_label_checksum = label_checksum(data.test.labels);
    rec.flipped_labels = data.flipped;
    const Mlp model(cfg.mlp_spec());
    const MlpObjective objective(model, data.train);
    ParamSet w = model.init(derive_seed(seed, seed_purpose::init));
    const auto batch_seed = derive_seed(seed, seed_purpose::batches);

    detail::train_loop(
        rec, opt, w, objective,
        [&](std::uint64_t epoch) { return minibatch_iter(data.train.size(), cfg.batch_size, batch_seed, epoch); },
        [&](const ParamSet& wt) {
          EpochMetrics m;
          const auto tr = model.score(wt, data.train);
          const auto te = model.score(wt, data.test);
          m.train_loss = tr.loss;
          m.train_accuracy = tr.accuracy;
          m.test_loss = te.loss;
          m.test_accuracy = te.accuracy;
          m.val_accuracy = data.validation.size() > 0 ? model.score(wt, data.validation).accuracy : std::nan("");
          m.full_grad_norm_sq = full_grad_norm(objective, wt, data.train.size());
          return m;
        });
    if (cfg.diag_samples > 0 && !rec.diverged)
      rec.norm_samples = sample_grad_norms(objective, w, data.train.size(), cfg.batch_size, cfg.diag_samples,
                                           derive_seed(seed, seed_purpose::diagnostics));
    rec.final_weights = std::move(w);
  } else {
    const AnalyticLandscape landscape = make_landscape(cfg);
    const LandscapeObjective objective(landscape);
    std::mt19937_64 rng(derive_seed(seed, seed_purpose::init));
    std::normal_distribution<double> normal(0.0, cfg.init_scale);
    Tensor w0({cfg.landscape_dim});
    for (double& v : w0.data()) v = normal(rng);
    ParamSet w{std::move(w0)};
    const std::vector<Batch> full_batch{Batch{0}};

    detail::train_loop(
        rec, opt, w, objective, [&](std::uint64_t) { return full_batch; },
        [&](const ParamSet& wt) {
          EpochMetrics m;
          const auto v = landscape.eval(wt[0]);
          m.train_loss = m.test_loss = v.value;
          m.train_accuracy = m.test_accuracy = m.val_accuracy = std::nan("");
          double g2 = 0.0;
          for (double x : v.gradient.data()) g2 += x * x;
          m.full_grad_norm_sq = g2;
          return m;
        });
    rec.final_weights = std::move(w);
  }

  rec.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

} // namespace aesam
