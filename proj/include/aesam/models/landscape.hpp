#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aesam/adcore/tensor.hpp"
#include "aesam/errors.hpp"
#include "aesam/models/objective.hpp"

namespace aesam {

enum class LandscapeKind { quadratic, scaled_quadratic, nonconvex_wells };

inline std::string to_string(LandscapeKind k) {
  switch (k) {
  case LandscapeKind::quadratic: return "quadratic";
  case LandscapeKind::scaled_quadratic: return "scaled-quadratic";
  case LandscapeKind::nonconvex_wells: return "nonconvex-wells";
  }
  return "?";
}

inline LandscapeKind landscape_kind_from_string(const std::string& s) {
  if (s == "quadratic") return LandscapeKind::quadratic;
  if (s == "scaled-quadratic") return LandscapeKind::scaled_quadratic;
  if (s == "nonconvex-wells") return LandscapeKind::nonconvex_wells;
  throw ConfigError("unknown landscape: " + s);
}

struct LandscapeValue {
  double value;
  Tensor gradient;
};

/// Closed-form test function with a known gradient-Lipschitz constant beta.
///
///   quadratic         ½ wᵀ A w, A symmetric (dense), beta = max |eig(A)|
///   scaled-quadratic  ½ Σ a_i w_i², beta = max |a_i|
///   nonconvex-wells   Σ ½ a w_i² + b (1 − cos(ω w_i)), beta = |a| + |b| ω²
class AnalyticLandscape {
public:
  /// ½‖w‖²
  static AnalyticLandscape quadratic(std::size_t dim) {
    AnalyticLandscape l(LandscapeKind::quadratic, dim);
    l.matrix_.assign(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) l.matrix_[i * dim + i] = 1.0;
    l.beta_ = 1.0;
    return l;
  }

  /// A = Q diag(eigenvalues) Qᵀ with Q a seeded random orthogonal matrix.
  static AnalyticLandscape quadratic(std::span<const double> eigenvalues, std::uint64_t seed) {
    const std::size_t d = eigenvalues.size();
    if (d == 0) throw ConfigError("quadratic: empty spectrum");
    const auto q = random_orthogonal(d, seed);
    AnalyticLandscape l(LandscapeKind::quadratic, d);
    l.matrix_.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += q[i * d + k] * eigenvalues[k] * q[j * d + k];
        l.matrix_[i * d + j] = s;
      }
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) {
        const double avg = 0.5 * (l.matrix_[i * d + j] + l.matrix_[j * d + i]);
        l.matrix_[i * d + j] = l.matrix_[j * d + i] = avg;
      }
    l.beta_ = 0.0;
    for (double e : eigenvalues) l.beta_ = std::max(l.beta_, std::abs(e));
    return l;
  }

  static AnalyticLandscape scaled_quadratic(std::vector<double> diagonal) {
    if (diagonal.empty()) throw ConfigError("scaled-quadratic: empty diagonal");
    AnalyticLandscape l(LandscapeKind::scaled_quadratic, diagonal.size());
    l.beta_ = 0.0;
    for (double a : diagonal) l.beta_ = std::max(l.beta_, std::abs(a));
    l.diagonal_ = std::move(diagonal);
    return l;
  }

  static AnalyticLandscape nonconvex_wells(std::size_t dim, double a = 1.0, double b = 0.5,
                                           double omega = 2.0) {
    if (dim == 0) throw ConfigError("nonconvex-wells: dimension must be positive");
    AnalyticLandscape l(LandscapeKind::nonconvex_wells, dim);
    l.a_ = a;
    l.b_ = b;
    l.omega_ = omega;
    l.beta_ = std::abs(a) + std::abs(b) * omega * omega;
    return l;
  }

  LandscapeKind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return dim_; }
  double beta() const noexcept { return beta_; }

  LandscapeValue eval(const Tensor& w) const {
    if (w.size() != dim_) throw ConfigError("landscape: dimension mismatch");
    Tensor g({dim_});
    double v = 0.0;
    switch (kind_) {
    case LandscapeKind::quadratic:
      for (std::size_t i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) s += matrix_[i * dim_ + j] * w[j];
        g[i] = s;
        v += 0.5 * w[i] * s;
      }
      break;
    case LandscapeKind::scaled_quadratic:
      for (std::size_t i = 0; i < dim_; ++i) {
        g[i] = diagonal_[i] * w[i];
        v += 0.5 * diagonal_[i] * w[i] * w[i];
      }
      break;
    case LandscapeKind::nonconvex_wells:
      for (std::size_t i = 0; i < dim_; ++i) {
        const double x = w[i];
        g[i] = a_ * x + b_ * omega_ * std::sin(omega_ * x);
        v += 0.5 * a_ * x * x + b_ * (1.0 - std::cos(omega_ * x));
      }
      break;
    }
    return LandscapeValue{v, std::move(g)};
  }

  double value(const Tensor& w) const { return eval(w).value; }

private:
  AnalyticLandscape(LandscapeKind k, std::size_t dim) : kind_(k), dim_(dim) {}

  /// Gram-Schmidt on seeded Gaussian columns; column k is q[· * d + k].
  static std::vector<double> random_orthogonal(std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> q(d * d);
    for (std::size_t k = 0; k < d; ++k) {
      std::vector<double> v(d);
      double n2 = 0.0;
      do {
        for (double& x : v) x = normal(rng);
        for (int pass = 0; pass < 2; ++pass)
          for (std::size_t j = 0; j < k; ++j) {
            double proj = 0.0;
            for (std::size_t i = 0; i < d; ++i) proj += q[i * d + j] * v[i];
            for (std::size_t i = 0; i < d; ++i) v[i] -= proj * q[i * d + j];
          }
        n2 = 0.0;
        for (double x : v) n2 += x * x;
      } while (n2 < 1e-12);
      const double inv = 1.0 / std::sqrt(n2);
      for (std::size_t i = 0; i < d; ++i) q[i * d + k] = v[i] * inv;
    }
    return q;
  }

  LandscapeKind kind_;
  std::size_t dim_;
  double beta_ = 0.0;
  std::vector<double> matrix_;
  std::vector<double> diagonal_;
  double a_ = 0.0, b_ = 0.0, omega_ = 0.0;
};

inline LandscapeValue landscape_eval(const AnalyticLandscape& l, const Tensor& w) { return l.eval(w); }

/// Full-batch objective over a landscape; parameters are a single vector.
class LandscapeObjective {
public:
  explicit LandscapeObjective(const AnalyticLandscape& l) : landscape_(&l) {}

  Evaluation evaluate(const ParamSet& w, std::span<const std::size_t> = {}) const {
    if (w.size() != 1) throw ConfigError("landscape objective: expected one parameter tensor");
    auto r = landscape_->eval(w[0]);
    if (!std::isfinite(r.value) || !r.gradient.all_finite())
      throw NumericError("landscape: non-finite value");
    return Evaluation{r.value, ParamSet{std::move(r.gradient)}};
  }

  const AnalyticLandscape& landscape() const noexcept { return *landscape_; }

private:
  const AnalyticLandscape* landscape_;
};

} // namespace aesam
