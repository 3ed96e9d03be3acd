#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aesam/adcore/tensor.hpp"
#include "aesam/errors.hpp"
#include "aesam/models/objective.hpp"
#include "aesam/optim/directions.hpp"
#include "aesam/optim/schedule.hpp"
#include "aesam/optim/stats.hpp"
#include "aesam/optim/triggers.hpp"

namespace aesam {

enum class Algorithm { erm, sam, ss_sam, looksam, ae_sam, ae_looksam };

inline std::string to_string(Algorithm a) {
  switch (a) {
  case Algorithm::erm: return "erm";
  case Algorithm::sam: return "sam";
  case Algorithm::ss_sam: return "ss-sam";
  case Algorithm::looksam: return "looksam";
  case Algorithm::ae_sam: return "ae-sam";
  case Algorithm::ae_looksam: return "ae-looksam";
  }
  return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
  for (auto a : {Algorithm::erm, Algorithm::sam, Algorithm::ss_sam, Algorithm::looksam,
                 Algorithm::ae_sam, Algorithm::ae_looksam})
    if (to_string(a) == s) return a;
  throw ConfigError("unknown algorithm: " + s);
}

inline bool reuses_direction(Algorithm a) {
  return a == Algorithm::looksam || a == Algorithm::ae_looksam;
}

enum class LrSchedule { constant, cosine };

inline std::string to_string(LrSchedule s) { return s == LrSchedule::constant ? "constant" : "cosine"; }
inline LrSchedule lr_schedule_from_string(const std::string& s) {
  if (s == "constant") return LrSchedule::constant;
  if (s == "cosine") return LrSchedule::cosine;
  throw ConfigError("unknown learning-rate schedule: " + s);
}

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::ae_sam;
  double eta = 0.1;
  double rho = 0.05;
  double alpha = 0.7;
  std::uint64_t k = 5;
  double p = 0.5;
  double delta = 0.9;
  double lambda1 = -1.0;
  double lambda2 = 1.0;
  std::uint64_t total_steps = 1;
  PerturbationMode perturbation = PerturbationMode::normalized;
  LrSchedule lr_schedule = LrSchedule::constant;
  std::uint64_t seed = 0;

  void validate() const {
    if (total_steps == 0) throw ConfigError("optimizer: T must be positive");
    if (!(eta > 0.0)) throw ConfigError("optimizer: eta must be positive");
    if (!(rho > 0.0)) throw ConfigError("optimizer: rho must be positive");
    if (!(alpha >= 0.0)) throw ConfigError("optimizer: alpha must be non-negative");
    if (k < 1) throw ConfigError("optimizer: k must be >= 1");
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("optimizer: p outside [0,1]");
    if (!(delta >= 0.0 && delta <= 1.0)) throw ConfigError("optimizer: delta outside [0,1]");
    if (!std::isfinite(lambda1) || !std::isfinite(lambda2))
      throw ConfigError("optimizer: lambda1/lambda2 must be finite");
  }
};

/// One iteration's bookkeeping. xi == 1 iff the SAM branch ran.
struct StepTrace {
  std::uint64_t t = 0;
  int xi = 0;
  double loss = 0.0;
  double grad_norm_sq = 0.0;
  double c_t = 0.0;
  double mu = 0.0;
  double sigma2 = 0.0;

  friend bool operator==(const StepTrace&, const StepTrace&) = default;
};

/// The whole family behind one step(): ERM, SAM, SS-SAM, LookSAM, AE-SAM and
/// AE-LookSAM. Owns the EMA statistics, trigger RNG and the reused LookSAM
/// direction. Single owner, mutated only by step().
class Optimizer {
public:
  explicit Optimizer(OptimizerConfig cfg)
      : cfg_(cfg), rng_(mix_seed(cfg.seed)) {
    cfg_.validate();
    stats_.delta = cfg_.delta;
    schedule_ = ThresholdSchedule{cfg_.lambda1, cfg_.lambda2, cfg_.total_steps};
  }

  const OptimizerConfig& config() const noexcept { return cfg_; }
  const GradNormStats& stats() const noexcept { return stats_; }
  const ThresholdSchedule& schedule() const noexcept { return schedule_; }
  std::uint64_t t() const noexcept { return t_; }
  std::uint64_t grad_evals() const noexcept { return grad_evals_; }
  std::uint64_t sam_steps() const noexcept { return sam_steps_; }
  const std::optional<ParamSet>& reused_direction() const noexcept { return g_v_; }

  double learning_rate(std::uint64_t t) const {
    if (cfg_.lr_schedule == LrSchedule::constant) return cfg_.eta;
    const double frac = static_cast<double>(t) / static_cast<double>(cfg_.total_steps);
    return cfg_.eta * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
  }

  /// One update of `w` in place on the mini-batch `batch`.
  /// Throws NumericError on a non-finite loss or gradient; `w` is then left
  /// at its pre-step value.
  template <Objective O>
  StepTrace step(ParamSet& w, const O& objective, std::span<const std::size_t> batch) {
    if (t_ >= cfg_.total_steps) throw UsageError("optimizer: step counter reached T");

    Evaluation e = objective.evaluate(w, batch);
    ++grad_evals_;
    if (!std::isfinite(e.loss) || !tensor_ops::all_finite(e.grad))
      throw NumericError("optimizer: non-finite loss or gradient at t=" + std::to_string(t_));
    const ParamSet& g = e.grad;
    const double g2 = tensor_ops::squared_norm(g);

    // Statistics first, then the trigger.
    stats_ = ema_update(stats_, g2);
    const double c = threshold_at(schedule_, t_);

    bool use_sam = false;
    switch (cfg_.algorithm) {
    case Algorithm::erm: use_sam = false; break;
    case Algorithm::sam: use_sam = true; break;
    case Algorithm::ss_sam: use_sam = ss_sam_trigger(rng_, cfg_.p); break;
    case Algorithm::looksam: use_sam = looksam_trigger(t_, cfg_.k); break;
    case Algorithm::ae_sam:
    case Algorithm::ae_looksam: use_sam = sam_trigger(g2, stats_, c); break;
    }
    const bool reuse = reuses_direction(cfg_.algorithm);
    if (reuse && !g_v_) use_sam = true;  // nothing to reuse yet

    ParamSet direction;
    std::optional<ParamSet> eps;
    if (use_sam) eps = sam_perturb(g, cfg_.rho, cfg_.perturbation);
    if (eps) {
      Evaluation perturbed = objective.evaluate(tensor_ops::add_scaled(w, 1.0, *eps), batch);
      ++grad_evals_;
      if (!std::isfinite(perturbed.loss) || !tensor_ops::all_finite(perturbed.grad))
        throw NumericError("optimizer: non-finite perturbed gradient at t=" + std::to_string(t_));
      if (reuse)
        if (auto gv = looksam_decompose(g, perturbed.grad)) g_v_ = std::move(*gv);
      direction = std::move(perturbed.grad);
    } else {
      use_sam = false;
      direction = (reuse && g_v_) ? looksam_compose(g, *g_v_, cfg_.alpha) : g;
    }

    tensor_ops::axpy(-learning_rate(t_), direction, w);

    StepTrace tr{t_, use_sam ? 1 : 0, e.loss, g2, c, stats_.mu, stats_.sigma2};
    if (use_sam) ++sam_steps_;
    ++t_;
    return tr;
  }

private:
  static std::uint64_t mix_seed(std::uint64_t s) {
    // splitmix64 finalizer, so nearby seeds give unrelated streams
    s += 0x9e3779b97f4a7c15ull;
    s = (s ^ (s >> 30)) * 0xbf58476d1ce4e5b9ull;
    s = (s ^ (s >> 27)) * 0x94d049bb133111ebull;
    return s ^ (s >> 31);
  }

  OptimizerConfig cfg_;
  GradNormStats stats_;
  ThresholdSchedule schedule_;
  std::mt19937_64 rng_;
  std::optional<ParamSet> g_v_;
  std::uint64_t t_ = 0;
  std::uint64_t grad_evals_ = 0;
  std::uint64_t sam_steps_ = 0;
};

struct SamFraction {
  double percent;
  double zeta;
};

/// %SAM = 100·Σξ/T and ζ = Σξ/T over the given traces.
inline SamFraction sam_fraction(std::span<const StepTrace> traces) {
  if (traces.empty()) throw ConfigError("sam_fraction: no traces");
  std::uint64_t n = 0;
  for (const auto& tr : traces) n += static_cast<std::uint64_t>(tr.xi);
  const auto total = static_cast<double>(traces.size());
  return SamFraction{100.0 * static_cast<double>(n) / total, static_cast<double>(n) / total};
}

} // namespace aesam
