#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "aesam/harness/experiment.hpp"
#include "aesam/harness/sweep.hpp"
#include "aesam/metrics/qq.hpp"

namespace aesam {

struct ReportResult {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> errors;  // one per file that could not be written

  bool ok() const noexcept { return errors.empty(); }
};

namespace report_detail {

using fmt_detail::format_double;

inline void write_file(ReportResult& res, const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (out) out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (out) out.close();
  if (!out) {
    res.errors.push_back(path.string() + ": write failed");
    return;
  }
  res.written.push_back(path);
}

inline void ensure_dir(ReportResult& res, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) res.errors.push_back(dir.string() + ": " + ec.message());
}

inline std::string run_dir_name(std::size_t index, const RunRecord& r) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "run%03zu_%s_s%llu", index, to_string(r.config.algorithm).c_str(),
                static_cast<unsigned long long>(r.seed));
  return buf;
}

inline std::string steps_csv(const RunRecord& r) {
  std::string s = "t,xi,loss,grad_norm_sq,c_t,mu,sigma2\n";
  for (const auto& tr : r.traces) {
    s += std::to_string(tr.t) + ',' + std::to_string(tr.xi) + ',' + format_double(tr.loss) + ',' +
         format_double(tr.grad_norm_sq) + ',' + format_double(tr.c_t) + ',' + format_double(tr.mu) + ',' +
         format_double(tr.sigma2) + '\n';
  }
  return s;
}

inline std::string epochs_csv(const RunRecord& r) {
  std::string s = "epoch,train_loss,train_acc,val_acc,test_loss,test_acc,full_grad_norm_sq\n";
  for (const auto& e : r.epochs) {
    s += std::to_string(e.epoch) + ',' + format_double(e.train_loss) + ',' + format_double(e.train_accuracy) +
         ',' + format_double(e.val_accuracy) + ',' + format_double(e.test_loss) + ',' +
         format_double(e.test_accuracy) + ',' + format_double(e.full_grad_norm_sq) + '\n';
  }
  return s;
}

inline nlohmann::ordered_json run_summary_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["algorithm"] = to_string(r.config.algorithm);
  j["seed"] = r.seed;
  j["total_steps"] = r.total_steps;
  j["steps_taken"] = r.steps_taken;
  j["sam_steps"] = r.sam_steps;
  j["grad_evals"] = r.grad_evals;
  j["sam_percent"] = r.sam_percent;
  j["zeta"] = r.zeta;
  j["final_train_acc"] = r.final_train_accuracy();
  j["final_test_acc"] = r.final_test_accuracy();
  j["flipped_labels"] = r.flipped_labels;
  j["test_label_checksum"] = r.test_label_checksum;
  j["diverged"] = r.diverged;
  j["failed"] = r.failed;
  j["error"] = r.error;
  j["wall_clock_seconds"] = r.wall_clock_seconds;
  return j;
}

} // namespace report_detail

inline std::string summary_csv(std::span<const RunRecord> records) {
  using report_detail::format_double;
  std::string s = "algorithm,seed,sam_percent,final_train_acc,final_test_acc,zeta,total_steps,grad_evals,diverged,failed\n";
  for (const auto& r : records) {
    s += to_string(r.config.algorithm) + ',' + std::to_string(r.seed) + ',' + format_double(r.sam_percent) + ',' +
         format_double(r.final_train_accuracy()) + ',' + format_double(r.final_test_accuracy()) + ',' +
         format_double(r.zeta) + ',' + std::to_string(r.total_steps) + ',' + std::to_string(r.grad_evals) + ',' +
         (r.diverged ? "1" : "0") + ',' + (r.failed ? "1" : "0") + '\n';
  }
  return s;
}

/// Write summary.csv plus one directory per run with steps.csv, epochs.csv,
/// config.txt, config.json, summary.json and, when norm samples exist,
/// norms.csv and qq.csv. Failures are collected per file.
inline ReportResult emit_reports(std::span<const RunRecord> records, const std::filesystem::path& dir) {
  namespace rd = report_detail;
  ReportResult res;
  rd::ensure_dir(res, dir);
  rd::write_file(res, dir / "summary.csv", summary_csv(records));

  for (std::size_t i = 0; i < records.size(); ++i) {
    const RunRecord& r = records[i];
    const auto run_dir = dir / rd::run_dir_name(i, r);
    rd::ensure_dir(res, run_dir);
    rd::write_file(res, run_dir / "steps.csv", rd::steps_csv(r));
    rd::write_file(res, run_dir / "epochs.csv", rd::epochs_csv(r));
    rd::write_file(res, run_dir / "config.txt", r.config.to_text());
    rd::write_file(res, run_dir / "config.json", r.config.to_json().dump(2) + '\n');
    rd::write_file(res, run_dir / "summary.json", rd::run_summary_json(r).dump(2) + '\n');

    if (!r.norm_samples.empty()) {
      std::string norms = "sample,grad_norm_sq\n";
      for (std::size_t k = 0; k < r.norm_samples.size(); ++k)
        norms += std::to_string(k) + ',' + rd::format_double(r.norm_samples[k]) + '\n';
      rd::write_file(res, run_dir / "norms.csv", norms);
    }
    if (r.norm_samples.size() >= 20) {
      const QqReport qq = qq_points(r.norm_samples);
      std::string s = "theoretical,sample\n";
      for (std::size_t k = 0; k < qq.sample_quantiles.size(); ++k)
        s += rd::format_double(qq.theoretical_quantiles[k]) + ',' + rd::format_double(qq.sample_quantiles[k]) + '\n';
      rd::write_file(res, run_dir / "qq.csv", s);
    }
  }
  return res;
}

/// One row per sweep cell: the λ/ρ/α coordinates and mean ± std columns.
inline std::string cells_csv(std::span<const SweepCell> cells) {
  using report_detail::format_double;
  std::string s = "cell,algorithm,lambda1,lambda2,rho,alpha,noise,sam_mean,sam_std,train_acc_mean,train_acc_std,"
                  "test_acc_mean,test_acc_std,runs,failures\n";
  for (const auto& c : cells) {
    const auto& k = c.config;
    s += std::to_string(c.config_index) + ',' + to_string(k.algorithm) + ',' + format_double(k.lambda1) + ',' +
         format_double(k.lambda2) + ',' + format_double(k.rho) + ',' + format_double(k.alpha) + ',' +
         format_double(k.noise) + ',' + format_double(c.sam_percent.mean) + ',' +
         format_double(c.sam_percent.stddev) + ',' + format_double(c.train_accuracy.mean) + ',' +
         format_double(c.train_accuracy.stddev) + ',' + format_double(c.test_accuracy.mean) + ',' +
         format_double(c.test_accuracy.stddev) + ',' + std::to_string(c.sam_percent.count) + ',' +
         std::to_string(c.failures) + '\n';
  }
  return s;
}

/// Algorithms as rows, noise levels as columns, median clean-test accuracy.
inline std::string noise_table_csv(const NoiseSuiteResult& r) {
  using report_detail::format_double;
  std::string s = "algorithm";
  for (double l : r.levels) s += ",test@" + format_double(l);
  for (double l : r.levels) s += ",train@" + format_double(l);
  s += '\n';
  for (Algorithm a : r.algorithms) {
    s += to_string(a);
    for (double l : r.levels) s += ',' + format_double(r.cell(a, l).median_test());
    for (double l : r.levels) s += ',' + format_double(r.cell(a, l).median_train());
    s += '\n';
  }
  return s;
}

} // namespace aesam
