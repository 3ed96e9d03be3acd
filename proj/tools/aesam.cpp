// aesam: command-line front end for the experiment harness.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aesam/harness/checkpoint.hpp"
#include "aesam/harness/config.hpp"
#include "aesam/harness/experiment.hpp"
#include "aesam/harness/reports.hpp"
#include "aesam/harness/sweep.hpp"
#include "aesam/metrics/bound.hpp"
#include "aesam/metrics/gradient_stats.hpp"
#include "aesam/metrics/qq.hpp"

namespace fs = std::filesystem;
using namespace aesam;

namespace {

using fmt_detail::format_double;

/// Config file plus per-key flag overrides, shared by every subcommand.
struct ConfigOptions {
  std::string path;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", path, "config file (key = value lines)")->check(CLI::ExistingFile);
    for (const auto& key : ExperimentConfig::keys()) {
      std::string flag = "--" + std::string(key.name);
      std::string dashed = key.name;
      for (char& ch : dashed)
        if (ch == '_') ch = '-';
      if (dashed != key.name) flag += ",--" + dashed;
      app->add_option_function<std::string>(
             flag, [this, name = std::string(key.name)](const std::string& v) { overrides[name] = v; }, key.help)
          ->group("Config overrides");
    }
  }

  ExperimentConfig load() const {
    ExperimentConfig c = path.empty() ? ExperimentConfig{} : ExperimentConfig::from_file(path);
    for (const auto& [k, v] : overrides) c.set(k, v);
    return c;
  }

  ExperimentConfig load_over(ExperimentConfig base) const {
    if (!path.empty()) base = ExperimentConfig::from_file(path);
    for (const auto& [k, v] : overrides) base.set(k, v);
    return base;
  }
};

int report_runs(std::span<const RunRecord> records, const fs::path& dir) {
  int failures = 0;
  for (const auto& r : records) {
    if (r.ok()) continue;
    ++failures;
    std::cerr << to_string(r.config.algorithm) << " seed " << r.seed << (r.diverged ? " diverged: " : " failed: ")
              << r.error << '\n';
  }
  const ReportResult res = emit_reports(records, dir);
  for (const auto& e : res.errors) std::cerr << "report: " << e << '\n';
  return failures == 0 && res.ok() ? 0 : 1;
}

void print_run_line(const RunRecord& r) {
  std::printf("%-11s seed=%-4llu %%SAM=%-8s train_acc=%-8s test_acc=%-8s grad_evals=%llu  %.1fs%s\n",
              to_string(r.config.algorithm).c_str(), static_cast<unsigned long long>(r.seed),
              format_double(r.sam_percent).c_str(), format_double(r.final_train_accuracy()).c_str(),
              format_double(r.final_test_accuracy()).c_str(), static_cast<unsigned long long>(r.grad_evals),
              r.wall_clock_seconds, r.ok() ? "" : "  [FAILED]");
}

void print_cells(std::span<const SweepCell> cells) {
  for (const auto& c : cells)
    std::printf("cell %-3zu %-11s l1=%-4s l2=%-4s rho=%-6s %%SAM=%s±%s test_acc=%s±%s%s\n", c.config_index,
                to_string(c.config.algorithm).c_str(), format_double(c.config.lambda1).c_str(),
                format_double(c.config.lambda2).c_str(), format_double(c.config.rho).c_str(),
                format_double(c.sam_percent.mean).c_str(), format_double(c.sam_percent.stddev).c_str(),
                format_double(c.test_accuracy.mean).c_str(), format_double(c.test_accuracy.stddev).c_str(),
                c.failures ? "  [failures]" : "");
}

int cmd_run(const ConfigOptions& opts, unsigned threads, const std::string& checkpoint) {
  const ExperimentConfig cfg = opts.load();
  cfg.validate();
  const SweepResult res = sweep(std::span(&cfg, 1), cfg.seeds, threads);
  for (const auto& r : res.records) print_run_line(r);
  int rc = report_runs(res.records, cfg.output_dir);
  if (!checkpoint.empty()) {
    for (const auto& r : res.records) {
      if (!r.ok()) continue;
      const fs::path stem = fs::path(checkpoint).string() + "_s" + std::to_string(r.seed);
      save_checkpoint(r.final_weights, stem);
      std::cout << "checkpoint " << stem.string() << ".bin\n";
    }
  }
  std::cout << "reports in " << cfg.output_dir << '\n';
  return rc;
}

int cmd_sweep(const ConfigOptions& opts, unsigned threads, const std::vector<std::string>& grid,
              bool lambda_ablation) {
  const ExperimentConfig base = opts.load();
  std::vector<ExperimentConfig> configs{base};
  if (lambda_ablation) configs = lambda_grid(base);
  for (const auto& spec : grid) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("--grid expects key=v1,v2,...");
    const std::string key = fmt_detail::trim(spec.substr(0, eq));
    std::vector<ExperimentConfig> next;
    for (const auto& c : configs)
      for (const auto& v : fmt_detail::split(spec.substr(eq + 1), ',')) {
        ExperimentConfig x = c;
        x.set(key, v);
        next.push_back(std::move(x));
      }
    configs = std::move(next);
  }
  for (const auto& c : configs) c.validate();
  std::cout << configs.size() << " cells x " << base.seeds.size() << " seeds\n";

  const SweepResult res = sweep(configs, base.seeds, threads);
  print_cells(res.cells);
  int rc = report_runs(res.records, base.output_dir);
  ReportResult extra;
  report_detail::write_file(extra, fs::path(base.output_dir) / "cells.csv", cells_csv(res.cells));
  for (const auto& e : extra.errors) std::cerr << "report: " << e << '\n';
  if (lambda_ablation) {
    const auto mono = check_lambda_monotonicity(res.cells);
    std::cout << "lambda1 monotonicity: " << (mono.monotone ? "holds" : "violated") << '\n';
    for (const auto& v : mono.violations) std::cout << "  " << v << '\n';
  }
  return rc != 0 || !extra.ok() ? 1 : 0;
}

int cmd_noise(const ConfigOptions& opts, unsigned threads, std::vector<double> levels,
              const std::vector<std::string>& algorithm_names) {
  const ExperimentConfig base = opts.load_over(noise_suite_defaults());
  base.validate();
  std::vector<Algorithm> algorithms;
  for (const auto& a : algorithm_names) algorithms.push_back(algorithm_from_string(a));
  const NoiseSuiteResult res = noise_robustness_suite(base, levels, algorithms, base.seeds, threads);

  std::cout << "median clean-test accuracy (train in brackets)\n" << std::string(12, ' ');
  for (double l : res.levels) std::printf("  noise=%-12s", format_double(l).c_str());
  std::cout << '\n';
  for (Algorithm a : res.algorithms) {
    std::printf("%-12s", to_string(a).c_str());
    for (double l : res.levels) {
      const auto& c = res.cell(a, l);
      std::printf("  %.4f [%.4f]  ", c.median_test(), c.median_train());
    }
    std::cout << '\n';
  }
  std::cout << "test labels identical across runs: " << (res.clean_test_labels ? "yes" : "NO") << '\n';

  int rc = report_runs(res.records, base.output_dir);
  ReportResult extra;
  report_detail::write_file(extra, fs::path(base.output_dir) / "noise_table.csv", noise_table_csv(res));
  for (const auto& e : extra.errors) std::cerr << "report: " << e << '\n';
  return rc != 0 || !extra.ok() || !res.clean_test_labels ? 1 : 0;
}

int cmd_diag(const ConfigOptions& opts, const std::string& checkpoint, std::size_t samples, std::size_t batches,
             std::uint64_t seed) {
  const ExperimentConfig cfg = opts.load();
  cfg.validate();
  if (cfg.model != ModelKind::mlp) throw ConfigError("diag: needs model = mlp");
  const DataSplits data = prepare_data(cfg, cfg.seeds.front());
  const Mlp model(cfg.mlp_spec());
  const MlpObjective objective(model, data.train);
  const ParamSet w = checkpoint.empty() ? model.init(derive_seed(cfg.seeds.front(), seed_purpose::init))
                                        : load_checkpoint(checkpoint);
  model.check(w, data.train);

  const auto norms = sample_grad_norms(objective, w, data.train.size(), cfg.batch_size, samples, seed);
  const QqReport qq = qq_points(norms);
  const VarianceReport var = gradient_variance(objective, w, data.train.size(), cfg.batch_size, batches, seed);

  std::cout << "squared-norm samples: " << norms.size() << "  Q-Q correlation: " << format_double(qq.correlation)
            << '\n'
            << "full-batch ||g_D||^2: " << format_double(var.full_sq_norm) << '\n'
            << "E||g_B||^2 - ||g_D||^2: " << format_double(var.variance) << '\n'
            << "E||g_B - g_D||^2: " << format_double(var.direct_variance) << " (se " << format_double(var.standard_error)
            << ")\n"
            << "estimates agree within 2 se: " << (var.agrees() ? "yes" : "no") << '\n';

  const fs::path dir = cfg.output_dir;
  ReportResult res;
  report_detail::ensure_dir(res, dir);
  std::string n = "sample,grad_norm_sq\n", q = "theoretical,sample\n";
  for (std::size_t i = 0; i < norms.size(); ++i) n += std::to_string(i) + ',' + format_double(norms[i]) + '\n';
  for (std::size_t i = 0; i < qq.sample_quantiles.size(); ++i)
    q += format_double(qq.theoretical_quantiles[i]) + ',' + format_double(qq.sample_quantiles[i]) + '\n';
  report_detail::write_file(res, dir / "diag_norms.csv", n);
  report_detail::write_file(res, dir / "diag_qq.csv", q);
  for (const auto& e : res.errors) std::cerr << "report: " << e << '\n';
  return res.ok() ? 0 : 1;
}

int cmd_check_bound(std::size_t trials, std::uint64_t seed, bool verbose) {
  const auto results = bound_falsification(trials, seed);
  std::size_t held = 0;
  for (const auto& t : results) {
    held += t.check.satisfied;
    if (verbose || !t.check.satisfied)
      std::printf("%-16s d=%-3zu xi=%-11s T=%-4zu zeta=%-6.3f lhs=%-12.6g rhs=%-12.6g %s\n", t.landscape.c_str(),
                  t.dimension, t.xi_pattern.c_str(), t.check.steps, t.check.zeta, t.check.left, t.check.right,
                  t.check.satisfied ? "ok" : "VIOLATED");
  }
  std::cout << "bound held in " << held << "/" << results.size() << " trials\n";
  return held == results.size() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive sharpness-aware training experiments"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("-j,--threads", threads, "worker threads for multi-run commands (0 = all cores)");

  ConfigOptions run_opts, sweep_opts, noise_opts, diag_opts;
  std::string checkpoint_out;
  auto* run = app.add_subcommand("run", "train every seed of one config and write reports");
  run_opts.attach(run);
  run->add_option("--save-checkpoint", checkpoint_out, "write final weights to <stem>_s<seed>.{bin,json}");

  std::vector<std::string> grid;
  bool lambda_ablation = false;
  auto* sw = app.add_subcommand("sweep", "Cartesian grid over config keys");
  sweep_opts.attach(sw);
  sw->add_option("--grid", grid, "key=v1,v2,... (repeatable; axes multiply)");
  sw->add_flag("--lambda-ablation", lambda_ablation, "lambda1 x lambda2 over {-2,-1,0,1,2}, lambda1 <= lambda2");

  std::vector<double> levels{0.2, 0.4, 0.6, 0.8};
  std::vector<std::string> algorithms{"erm", "sam", "looksam", "ae-sam", "ae-looksam"};
  auto* noise = app.add_subcommand("noise", "label-noise robustness table (noise preset unless overridden)");
  noise_opts.attach(noise);
  noise->add_option("--levels", levels, "noise levels in [0,1]")->delimiter(',');
  noise->add_option("--algorithms", algorithms, "algorithms to compare")->delimiter(',');

  std::string checkpoint_in;
  std::size_t samples = 400, batches = 400;
  std::uint64_t diag_seed = 0;
  auto* diag = app.add_subcommand("diag", "gradient-norm distribution, Q-Q and variance at a checkpoint");
  diag_opts.attach(diag);
  diag->add_option("--checkpoint", checkpoint_in, "weights stem (default: fresh initialization)");
  diag->add_option("--samples", samples, "mini-batch squared norms to sample");
  diag->add_option("--batches", batches, "batches for the variance estimate");
  diag->add_option("--diag-seed", diag_seed, "sampling seed");

  std::size_t trials = 100;
  std::uint64_t bound_seed = 0;
  bool verbose = false;
  auto* bound = app.add_subcommand("check-bound", "randomized full-batch check of the convergence bound");
  bound->add_option("--trials", trials, "number of randomized trials");
  bound->add_option("--seed", bound_seed, "trial generator seed");
  bound->add_flag("-v,--verbose", verbose, "print every trial");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opts, threads, checkpoint_out);
    if (*sw) return cmd_sweep(sweep_opts, threads, grid, lambda_ablation);
    if (*noise) return cmd_noise(noise_opts, threads, levels, algorithms);
    if (*diag) return cmd_diag(diag_opts, checkpoint_in, samples, batches, diag_seed);
    if (*bound) return cmd_check_bound(trials, bound_seed, verbose);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
