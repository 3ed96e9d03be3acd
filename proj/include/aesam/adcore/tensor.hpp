#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "aesam/errors.hpp"

namespace aesam {

/// Dense row-major tensor of doubles. product(shape) == data.size() always.
class Tensor {
public:
  Tensor() : shape_{0} {}

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(count(shape_), 0.0) {}

  Tensor(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (count(shape_) != data_.size())
      throw ConfigError("tensor: shape/data size mismatch");
  }

  static Tensor vector(std::vector<double> values) {
    const auto n = values.size();
    return Tensor({n}, std::move(values));
  }

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& values() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  /// 2-D access for row-major matrices.
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  bool all_finite() const noexcept {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

private:
  static std::size_t count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>{});
  }

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// Model parameters, gradients and perturbations are all tensor sets that
/// share one layout.
using ParamSet = std::vector<Tensor>;

namespace tensor_ops {

inline void check_layout(const ParamSet& a, const ParamSet& b) {
  if (a.size() != b.size())
    throw ConfigError("tensor set layout mismatch");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].shape() != b[i].shape())
      throw ConfigError("tensor set layout mismatch");
}

inline ParamSet zeros_like(const ParamSet& a) {
  ParamSet out;
  out.reserve(a.size());
  for (const auto& t : a) out.push_back(Tensor::zeros_like(t));
  return out;
}

inline std::size_t total_size(const ParamSet& a) {
  std::size_t n = 0;
  for (const auto& t : a) n += t.size();
  return n;
}

inline double dot(const ParamSet& a, const ParamSet& b) {
  check_layout(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = a[i].data();
    const auto y = b[i].data();
    for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * y[j];
  }
  return s;
}

inline double squared_norm(const ParamSet& a) { return dot(a, a); }
inline double norm(const ParamSet& a) { return std::sqrt(squared_norm(a)); }

/// y += alpha * x
inline void axpy(double alpha, const ParamSet& x, ParamSet& y) {
  check_layout(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto xs = x[i].data();
    auto ys = y[i].data();
    for (std::size_t j = 0; j < xs.size(); ++j) ys[j] += alpha * xs[j];
  }
}

inline ParamSet scaled(const ParamSet& x, double alpha) {
  ParamSet out = x;
  for (auto& t : out)
    for (double& v : t.data()) v *= alpha;
  return out;
}

/// a + alpha * b
inline ParamSet add_scaled(const ParamSet& a, double alpha, const ParamSet& b) {
  ParamSet out = a;
  axpy(alpha, b, out);
  return out;
}

inline bool all_finite(const ParamSet& a) {
  for (const auto& t : a)
    if (!t.all_finite()) return false;
  return true;
}

/// Concatenate every tensor's data into one vector.
inline std::vector<double> flatten(const ParamSet& a) {
  std::vector<double> out;
  out.reserve(total_size(a));
  for (const auto& t : a) out.insert(out.end(), t.values().begin(), t.values().end());
  return out;
}

/// Inverse of flatten, using `layout` for the shapes.
inline ParamSet unflatten(std::span<const double> flat, const ParamSet& layout) {
  if (flat.size() != total_size(layout))
    throw ConfigError("unflatten: size mismatch");
  ParamSet out;
  out.reserve(layout.size());
  std::size_t off = 0;
  for (const auto& t : layout) {
    std::vector<double> d(flat.begin() + static_cast<std::ptrdiff_t>(off),
                          flat.begin() + static_cast<std::ptrdiff_t>(off + t.size()));
    off += t.size();
    out.emplace_back(t.shape(), std::move(d));
  }
  return out;
}

/// ‖a−b‖ / max(‖a‖, ‖b‖, 1e-12)
inline double relative_error(const ParamSet& a, const ParamSet& b) {
  check_layout(a, b);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      const double d = a[i][j] - b[i][j];
      diff += d * d;
    }
  const double scale = std::max({norm(a), norm(b), 1e-12});
  return std::sqrt(diff) / scale;
}

} // namespace tensor_ops
} // namespace aesam
