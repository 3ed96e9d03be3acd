#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "aesam/errors.hpp"

namespace aesam {

/// Standardized order statistics against standard-normal quantiles.
struct QqReport {
  std::vector<double> sample_quantiles;       // non-decreasing
  std::vector<double> theoretical_quantiles;  // strictly increasing
  double correlation = 0.0;
};

inline double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Plotting positions (i − 0.5)/n. Constant samples standardize to zero and
/// report correlation 0.
inline QqReport qq_points(std::span<const double> samples) {
  if (samples.size() < 20) throw InsufficientDataError("qq_points: need at least 20 samples");
  const std::size_t n = samples.size();

  std::vector<double> z(samples.begin(), samples.end());
  std::sort(z.begin(), z.end());
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : z) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(n - 1));
  for (double& v : z) v = sd > 0.0 ? (v - mean) / sd : 0.0;

  const boost::math::normal_distribution<double> unit;
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i)
    q[i] = boost::math::quantile(unit, (static_cast<double>(i) + 0.5) / static_cast<double>(n));

  QqReport r;
  r.correlation = pearson_correlation(z, q);
  r.sample_quantiles = std::move(z);
  r.theoretical_quantiles = std::move(q);
  return r;
}

} // namespace aesam
