#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aesam/adcore/tensor.hpp"
#include "aesam/errors.hpp"
#include "aesam/models/landscape.hpp"
#include "aesam/optim/directions.hpp"

namespace aesam {

/// Full-batch guarantee for any mix of SAM and ERM steps on a beta-smooth
/// loss with ρ < 1/(2β) and η < 1/β:
///
///   min_{t<T} ‖∇L(w_t)‖²  ≤  (L(w_0) − L(w_T)) / (T·η·(1 − βη/2 − βρζ))
struct BoundCheck {
  double left = 0.0;
  double right = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double rho = 0.0;
  double zeta = 0.0;
  std::size_t steps = 0;
  double loss_initial = 0.0;
  double loss_final = 0.0;
  bool satisfied = false;
};

inline void check_bound_hypotheses(double beta, double eta, double rho) {
  if (!(rho > 0.0) || !(rho < 1.0 / (2.0 * beta)))
    throw PreconditionError("bound check requires 0 < rho < 1/(2 beta)");
  if (!(eta > 0.0) || !(eta < 1.0 / beta))
    throw PreconditionError("bound check requires 0 < eta < 1/beta");
}

/// Full-batch trajectory w_0..w_T where step t uses the SAM direction
/// ∇L(w_t + ρ∇L(w_t)) when xi[t] == 1 and the plain gradient otherwise.
inline std::vector<Tensor> full_batch_trajectory(const AnalyticLandscape& l, Tensor w0, double eta,
                                                 double rho, std::span<const int> xi) {
  std::vector<Tensor> traj;
  traj.reserve(xi.size() + 1);
  traj.push_back(std::move(w0));
  for (int x : xi) {
    const Tensor& w = traj.back();
    ParamSet g{l.eval(w).gradient};
    ParamSet dir = g;
    if (x == 1) {
      const ParamSet eps = *sam_perturb(g, rho, PerturbationMode::raw);
      dir = ParamSet{l.eval(tensor_ops::add_scaled(ParamSet{w}, 1.0, eps)[0]).gradient};
    }
    ParamSet next{w};
    tensor_ops::axpy(-eta, dir, next);
    traj.push_back(std::move(next[0]));
  }
  return traj;
}

inline BoundCheck check_gd_bound(std::span<const Tensor> trajectory, const AnalyticLandscape& l,
                                 double eta, double rho, std::span<const int> xi) {
  const double beta = l.beta();
  check_bound_hypotheses(beta, eta, rho);
  if (xi.empty() || trajectory.size() != xi.size() + 1)
    throw ConfigError("check_gd_bound: trajectory must hold T+1 points for T indicators");

  BoundCheck b;
  b.beta = beta;
  b.eta = eta;
  b.rho = rho;
  b.steps = xi.size();
  std::size_t sam = 0;
  for (int x : xi) sam += x == 1 ? 1 : 0;
  b.zeta = static_cast<double>(sam) / static_cast<double>(b.steps);

  b.left = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < b.steps; ++t) {
    const Tensor g = l.eval(trajectory[t]).gradient;
    double g2 = 0.0;
    for (double v : g.data()) g2 += v * v;
    b.left = std::min(b.left, g2);
  }
  b.loss_initial = l.value(trajectory.front());
  b.loss_final = l.value(trajectory.back());
  const double denom = static_cast<double>(b.steps) * eta * (1.0 - beta * eta / 2.0 - beta * rho * b.zeta);
  b.right = (b.loss_initial - b.loss_final) / denom;
  b.satisfied = b.left <= b.right;
  return b;
}

/// One randomized trial of the falsification harness.
struct BoundTrial {
  std::string landscape;
  std::size_t dimension = 0;
  std::string xi_pattern;
  BoundCheck check;
};

/// Random landscapes, step sizes inside the hypotheses, random starting
/// points and arbitrary SAM/ERM indicator sequences.
inline std::vector<BoundTrial> bound_falsification(std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> dim_dist(1, 20);
  std::uniform_int_distribution<std::size_t> steps_dist(5, 200);

  std::vector<BoundTrial> out;
  out.reserve(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    const std::size_t d = dim_dist(rng);
    const int kind = static_cast<int>(i % 3);
    AnalyticLandscape l = [&] {
      if (kind == 0) {
        std::vector<double> eig(d);
        const double top = 0.5 + 4.5 * unit(rng);
        for (double& e : eig) e = top * (1.2 * unit(rng) - 0.2);
        eig[0] = top;
        return AnalyticLandscape::quadratic(eig, rng());
      }
      if (kind == 1) {
        std::vector<double> diag(d);
        for (double& a : diag) a = 0.05 + 5.0 * unit(rng);
        return AnalyticLandscape::scaled_quadratic(diag);
      }
      return AnalyticLandscape::nonconvex_wells(d, 0.2 + 2.0 * unit(rng), 0.1 + unit(rng),
                                                0.5 + 2.5 * unit(rng));
    }();

    const double beta = l.beta();
    const double eta = (0.02 + 0.97 * unit(rng)) / beta;
    const double rho = (0.02 + 0.97 * unit(rng)) / (2.0 * beta);
    const std::size_t steps = steps_dist(rng);

    std::vector<int> xi(steps);
    const int pattern = static_cast<int>(rng() % 4);
    const double q = unit(rng);
    for (std::size_t t = 0; t < steps; ++t) {
      switch (pattern) {
      case 0: xi[t] = 0; break;
      case 1: xi[t] = 1; break;
      case 2: xi[t] = static_cast<int>(t % 2); break;
      default: xi[t] = unit(rng) < q ? 1 : 0; break;
      }
    }

    Tensor w0({d});
    for (double& v : w0.data()) v = 3.0 * normal(rng);
    const auto traj = full_batch_trajectory(l, std::move(w0), eta, rho, xi);

    static constexpr const char* patterns[] = {"erm", "sam", "alternating", "bernoulli"};
    out.push_back(BoundTrial{to_string(l.kind()), d, patterns[pattern],
                             check_gd_bound(traj, l, eta, rho, xi)});
  }
  return out;
}

} // namespace aesam
