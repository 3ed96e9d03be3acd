#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aesam/adcore/tensor.hpp"
#include "aesam/errors.hpp"

namespace aesam {

/// Reverse-mode computation record.
///
/// Every primitive appends one node; a node only refers to earlier nodes, so
/// creation order is a topological order and the reverse sweep simply walks
/// the node list backwards. A tape supports exactly one backward pass.
class Tape {
public:
  struct Var {
    std::size_t id;
  };

  /// Leaf whose gradient is returned by backward(), in creation order.
  Var parameter(Tensor value) {
    const Var v = push(Op::leaf, {}, std::move(value));
    params_.push_back(v.id);
    return v;
  }

  Var constant(Tensor value) { return push(Op::constant, {}, std::move(value)); }

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool consumed() const noexcept { return consumed_; }

  /// (m×k)·(k×n)
  Var matmul(Var a, Var b) {
    const Tensor& x = value(a);
    const Tensor& y = value(b);
    if (x.rank() != 2 || y.rank() != 2 || x.dim(1) != y.dim(0))
      throw ConfigError("matmul: shape mismatch");
    const std::size_t m = x.dim(0), k = x.dim(1), n = y.dim(1);
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) {
        const double xv = x.at(i, p);
        for (std::size_t j = 0; j < n; ++j) out.at(i, j) += xv * y.at(p, j);
      }
    return push(Op::matmul, {a.id, b.id}, std::move(out));
  }

  /// Elementwise sum of same-shaped tensors.
  Var add(Var a, Var b) {
    const Tensor& x = value(a);
    const Tensor& y = value(b);
    if (x.shape() != y.shape()) throw ConfigError("add: shape mismatch");
    Tensor out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
    return push(Op::add, {a.id, b.id}, std::move(out));
  }

  /// (m×n) + bias(n), bias broadcast over rows.
  Var add_bias(Var a, Var bias) {
    const Tensor& x = value(a);
    const Tensor& b = value(bias);
    if (x.rank() != 2 || b.rank() != 1 || b.dim(0) != x.dim(1))
      throw ConfigError("add_bias: shape mismatch");
    Tensor out = x;
    const std::size_t m = x.dim(0), n = x.dim(1);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) out.at(i, j) += b[j];
    return push(Op::add_bias, {a.id, bias.id}, std::move(out));
  }

  Var tanh(Var a) {
    Tensor out = value(a);
    for (double& v : out.data()) v = std::tanh(v);
    return push(Op::tanh, {a.id}, std::move(out));
  }

  Var relu(Var a) {
    Tensor out = value(a);
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    return push(Op::relu, {a.id}, std::move(out));
  }

  /// Scalar mean of every entry.
  Var mean(Var a) {
    const Tensor& x = value(a);
    if (x.size() == 0) throw ConfigError("mean: empty tensor");
    double s = 0.0;
    for (double v : x.data()) s += v;
    return push(Op::mean, {a.id}, scalar(s / static_cast<double>(x.size())));
  }

  /// Fused row-wise softmax + cross-entropy, averaged over rows.
  Var softmax_cross_entropy(Var logits, std::span<const int> labels) {
    const Tensor& z = value(logits);
    if (z.rank() != 2 || z.dim(0) != labels.size() || labels.empty())
      throw ConfigError("softmax_cross_entropy: shape mismatch");
    const std::size_t m = z.dim(0), k = z.dim(1);
    Tensor probs({m, k});
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const int y = labels[i];
      if (y < 0 || static_cast<std::size_t>(y) >= k)
        throw ConfigError("softmax_cross_entropy: label out of range");
      double zmax = z.at(i, 0);
      for (std::size_t j = 1; j < k; ++j) zmax = std::max(zmax, z.at(i, j));
      double denom = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double e = std::exp(z.at(i, j) - zmax);
        probs.at(i, j) = e;
        denom += e;
      }
      for (std::size_t j = 0; j < k; ++j) probs.at(i, j) /= denom;
      total += -(z.at(i, static_cast<std::size_t>(y)) - zmax - std::log(denom));
    }
    Var out = push(Op::softmax_xent, {logits.id}, scalar(total / static_cast<double>(m)));
    auto& node = nodes_[out.id];
    node.cache = std::move(probs);
    node.labels.assign(labels.begin(), labels.end());
    return out;
  }

  /// Mean over rows of ½‖pred_row − target_row‖²; a vector counts as one row.
  Var squared_error(Var pred, const Tensor& target) {
    const Tensor& p = value(pred);
    if (p.shape() != target.shape() || p.size() == 0)
      throw ConfigError("squared_error: shape mismatch");
    const std::size_t rows = p.rank() < 2 ? 1 : p.dim(0);
    Tensor diff = p;
    double s = 0.0;
    for (std::size_t i = 0; i < diff.size(); ++i) {
      diff[i] -= target[i];
      s += diff[i] * diff[i];
    }
    Var out = push(Op::squared_error, {pred.id}, scalar(0.5 * s / static_cast<double>(rows)));
    nodes_[out.id].cache = std::move(diff);
    return out;
  }

  /// Gradients of the scalar at `loss` with respect to every parameter().
  ParamSet backward(Var loss) {
    if (consumed_) throw UsageError("backward: record already consumed");
    consumed_ = true;
    if (value(loss).size() != 1) throw ConfigError("backward: loss is not a scalar");

    Grads grads(nodes_.size());
    grads[loss.id] = Tensor(value(loss).shape(), {1.0});

    for (std::size_t id = loss.id + 1; id-- > 0;) {
      if (!grads[id]) continue;
      propagate(id, grads);
    }

    ParamSet out;
    out.reserve(params_.size());
    for (std::size_t id : params_) {
      Tensor g = grads[id] ? std::move(*grads[id]) : Tensor::zeros_like(nodes_[id].value);
      if (!g.all_finite()) throw NumericError("backward: non-finite gradient");
      out.push_back(std::move(g));
    }
    return out;
  }

  /// Backward from the most recent node.
  ParamSet backward() {
    if (nodes_.empty()) throw UsageError("backward: empty record");
    return backward(Var{nodes_.size() - 1});
  }

private:
  enum class Op { leaf, constant, matmul, add, add_bias, tanh, relu, mean, softmax_xent, squared_error };

  struct Node {
    Op op;
    std::size_t in0 = 0, in1 = 0;
    Tensor value;
    Tensor cache;
    std::vector<int> labels;
  };

  using Grads = std::vector<std::optional<Tensor>>;

  static Tensor scalar(double v) { return Tensor({}, {v}); }

  Var push(Op op, std::initializer_list<std::size_t> inputs, Tensor value) {
    if (consumed_) throw UsageError("tape: record already consumed");
    if (!value.all_finite()) throw NumericError("forward: non-finite intermediate value");
    Node n{op, 0, 0, std::move(value), {}, {}};
    auto it = inputs.begin();
    if (it != inputs.end()) n.in0 = *it++;
    if (it != inputs.end()) n.in1 = *it;
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
  }

  void accumulate(Grads& grads, std::size_t id, const Tensor& g) {
    if (nodes_[id].op == Op::constant) return;
    if (!grads[id]) {
      grads[id] = g;
      return;
    }
    Tensor& acc = *grads[id];
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
  }

  void propagate(std::size_t id, Grads& grads) {
    const Node& node = nodes_[id];
    const Tensor& up = *grads[id];
    switch (node.op) {
    case Op::leaf:
    case Op::constant:
      break;
    case Op::matmul: {
      const Tensor& x = nodes_[node.in0].value;
      const Tensor& y = nodes_[node.in1].value;
      const std::size_t m = x.dim(0), k = x.dim(1), n = y.dim(1);
      Tensor gx({m, k}), gy({k, n});
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          const double xv = x.at(i, p);
          for (std::size_t j = 0; j < n; ++j) {
            acc += up.at(i, j) * y.at(p, j);
            gy.at(p, j) += xv * up.at(i, j);
          }
          gx.at(i, p) = acc;
        }
      accumulate(grads, node.in0, gx);
      accumulate(grads, node.in1, gy);
      break;
    }
    case Op::add:
      accumulate(grads, node.in0, up);
      accumulate(grads, node.in1, up);
      break;
    case Op::add_bias: {
      const std::size_t m = up.dim(0), n = up.dim(1);
      Tensor gb({n});
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gb[j] += up.at(i, j);
      accumulate(grads, node.in0, up);
      accumulate(grads, node.in1, gb);
      break;
    }
    case Op::tanh: {
      Tensor g = up;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - node.value[i] * node.value[i];
      accumulate(grads, node.in0, g);
      break;
    }
    case Op::relu: {
      Tensor g = up;
      for (std::size_t i = 0; i < g.size(); ++i)
        if (node.value[i] <= 0.0) g[i] = 0.0;
      accumulate(grads, node.in0, g);
      break;
    }
    case Op::mean: {
      const Tensor& x = nodes_[node.in0].value;
      Tensor g(x.shape());
      const double s = up[0] / static_cast<double>(x.size());
      for (double& v : g.data()) v = s;
      accumulate(grads, node.in0, g);
      break;
    }
    case Op::softmax_xent: {
      Tensor g = node.cache;
      const std::size_t m = g.dim(0);
      const double s = up[0] / static_cast<double>(m);
      for (std::size_t i = 0; i < m; ++i) g.at(i, static_cast<std::size_t>(node.labels[i])) -= 1.0;
      for (double& v : g.data()) v *= s;
      accumulate(grads, node.in0, g);
      break;
    }
    case Op::squared_error: {
      Tensor g = node.cache;
      const auto& shape = g.shape();
      const std::size_t rows = shape.size() < 2 ? 1 : shape[0];
      const double s = up[0] / static_cast<double>(rows);
      for (double& v : g.data()) v *= s;
      accumulate(grads, node.in0, g);
      break;
    }
    }
  }

  std::vector<Node> nodes_;
  std::vector<std::size_t> params_;
  bool consumed_ = false;
};

} // namespace aesam
