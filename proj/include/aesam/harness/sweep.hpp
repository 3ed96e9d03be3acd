#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "aesam/errors.hpp"
#include "aesam/harness/config.hpp"
#include "aesam/harness/experiment.hpp"

namespace aesam {

struct MeanStd {
  double mean = std::nan("");
  double stddev = std::nan("");  // sample (n-1); 0 for one value
  std::size_t count = 0;
};

inline MeanStd mean_std(std::span<const double> xs) {
  MeanStd r;
  r.count = xs.size();
  if (xs.empty()) return r;
  r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() == 1) {
    r.stddev = 0.0;
    return r;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return r;
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) return std::nan("");
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

/// Run a record, turning any non-numeric exception into failed = true.
inline RunRecord run_guarded(const ExperimentConfig& cfg, std::uint64_t seed) {
  try {
    return run_experiment(cfg, seed);
  } catch (const std::exception& e) {
    RunRecord r;
    r.config = cfg;
    r.seed = seed;
    r.failed = true;
    r.error = e.what();
    return r;
  }
}

/// Statistics over the successful runs of one config.
struct SweepCell {
  std::size_t config_index = 0;
  ExperimentConfig config;
  MeanStd sam_percent;
  MeanStd train_accuracy;
  MeanStd test_accuracy;
  std::size_t failures = 0;
};

struct SweepResult {
  std::vector<RunRecord> records;  // config-major, seed-minor
  std::vector<SweepCell> cells;

  bool all_ok() const {
    return std::all_of(records.begin(), records.end(), [](const RunRecord& r) { return r.ok(); });
  }
};

inline SweepCell aggregate_cell(std::size_t index, const ExperimentConfig& cfg,
                                std::span<const RunRecord> runs) {
  SweepCell c;
  c.config_index = index;
  c.config = cfg;
  std::vector<double> sp, tr, te;
  for (const auto& r : runs) {
    if (!r.ok()) {
      ++c.failures;
      continue;
    }
    sp.push_back(r.sam_percent);
    tr.push_back(r.final_train_accuracy());
    te.push_back(r.final_test_accuracy());
  }
  c.sam_percent = mean_std(sp);
  c.train_accuracy = mean_std(tr);
  c.test_accuracy = mean_std(te);
  return c;
}

/// Every (config, seed) pair, spread over `threads` workers. Output order and
/// contents do not depend on the thread count.
inline SweepResult sweep(std::span<const ExperimentConfig> configs, std::span<const std::uint64_t> seeds,
                         unsigned threads = 0) {
  if (configs.empty()) throw ConfigError("sweep: need at least one config");
  if (seeds.empty()) throw ConfigError("sweep: need at least one seed");
  const std::size_t jobs = configs.size() * seeds.size();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));

  SweepResult out;
  out.records.resize(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++)
      out.records[j] = run_guarded(configs[j / seeds.size()], seeds[j % seeds.size()]);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  for (std::size_t c = 0; c < configs.size(); ++c)
    out.cells.push_back(aggregate_cell(
        c, configs[c], std::span<const RunRecord>(out.records).subspan(c * seeds.size(), seeds.size())));
  return out;
}

/// All (λ1, λ2) pairs from `values` with λ1 ≤ λ2, λ2-major then λ1 ascending.
inline std::vector<ExperimentConfig> lambda_grid(const ExperimentConfig& base,
                                                 std::vector<double> values = {-2, -1, 0, 1, 2}) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<ExperimentConfig> out;
  for (double l2 : values)
    for (double l1 : values) {
      if (l1 > l2) continue;
      ExperimentConfig c = base;
      c.lambda1 = l1;
      c.lambda2 = l2;
      out.push_back(c);
    }
  return out;
}

/// For each λ2, is mean %SAM non-increasing as λ1 grows?
struct MonotonicityCheck {
  bool monotone = true;
  std::vector<std::string> violations;
};

inline MonotonicityCheck check_lambda_monotonicity(std::span<const SweepCell> cells, double tolerance = 0.0) {
  std::map<double, std::vector<std::pair<double, double>>> by_l2;
  for (const auto& c : cells) by_l2[c.config.lambda2].emplace_back(c.config.lambda1, c.sam_percent.mean);
  MonotonicityCheck m;
  for (auto& [l2, row] : by_l2) {
    std::sort(row.begin(), row.end());
    for (std::size_t i = 1; i < row.size(); ++i) {
      if (!(row[i].second <= row[i - 1].second + tolerance)) {
        m.monotone = false;
        m.violations.push_back("lambda2=" + fmt_detail::format_double(l2) + ": lambda1 " +
                               fmt_detail::format_double(row[i - 1].first) + " -> " +
                               fmt_detail::format_double(row[i].first) + " raises %SAM " +
                               fmt_detail::format_double(row[i - 1].second) + " -> " +
                               fmt_detail::format_double(row[i].second));
      }
    }
  }
  return m;
}

/// Label-noise setting where an MLP can memorize: few examples, many
/// features, overlapping clusters. Long training, larger radius, k = 2.
inline ExperimentConfig noise_suite_defaults() {
  ExperimentConfig c;
  c.dataset = DatasetKind::blobs;
  c.features = 50;
  c.classes = 4;
  c.cluster_std = 2.0;
  c.n = 333;  // 300 training rows after the validation split
  c.n_test = 1000;
  c.epochs = 200;
  c.eta = 0.1;
  c.rho = 0.5;
  c.k = 2;
  c.lambda1 = -1.0;
  c.lambda2 = 1.0;
  return c;
}

struct NoiseCell {
  Algorithm algorithm = Algorithm::erm;
  double noise = 0.0;
  std::vector<double> test_accuracy;  // per seed, successful runs only
  std::vector<double> train_accuracy;
  std::vector<double> sam_percent;
  std::size_t failures = 0;

  double median_test() const { return median(test_accuracy); }
  double median_train() const { return median(train_accuracy); }
  double mean_test() const { return mean_std(test_accuracy).mean; }
};

struct NoiseSuiteResult {
  std::vector<double> levels;
  std::vector<Algorithm> algorithms;
  std::vector<NoiseCell> cells;      // algorithm-major, level-minor
  std::vector<RunRecord> records;    // same order, seed-minor
  bool clean_test_labels = true;     // test checksum identical across every run

  const NoiseCell& cell(Algorithm a, double level) const {
    for (const auto& c : cells)
      if (c.algorithm == a && c.noise == level) return c;
    throw ConfigError("noise suite: no cell for " + to_string(a) + " at " + fmt_detail::format_double(level));
  }
  bool all_ok() const {
    return std::all_of(records.begin(), records.end(), [](const RunRecord& r) { return r.ok(); });
  }
};

inline NoiseSuiteResult noise_robustness_suite(const ExperimentConfig& base, std::vector<double> levels,
                                               std::vector<Algorithm> algorithms,
                                               std::span<const std::uint64_t> seeds, unsigned threads = 0) {
  if (levels.empty()) levels = {0.2, 0.4, 0.6, 0.8};
  for (double l : levels)
    if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("noise suite: level outside [0,1]");
  if (algorithms.empty()) throw ConfigError("noise suite: need at least one algorithm");

  std::vector<ExperimentConfig> configs;
  for (Algorithm a : algorithms)
    for (double l : levels) {
      ExperimentConfig c = base;
      c.algorithm = a;
      c.noise = l;
      configs.push_back(c);
    }
  SweepResult sw = sweep(configs, seeds, threads);

  NoiseSuiteResult out;
  out.levels = levels;
  out.algorithms = algorithms;
  std::optional<std::uint64_t> checksum;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    NoiseCell cell;
    cell.algorithm = configs[c].algorithm;
    cell.noise = configs[c].noise;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const RunRecord& r = sw.records[c * seeds.size() + s];
      if (!r.ok()) {
        ++cell.failures;
        continue;
      }
      if (!checksum) checksum = r.test_label_checksum;
      out.clean_test_labels = out.clean_test_labels && *checksum == r.test_label_checksum;
      cell.test_accuracy.push_back(r.final_test_accuracy());
      cell.train_accuracy.push_back(r.final_train_accuracy());
      cell.sam_percent.push_back(r.sam_percent);
    }
    out.cells.push_back(std::move(cell));
  }
  out.records = std::move(sw.records);
  return out;
}

} // namespace aesam
