#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aesam/adcore/tape.hpp"
#include "aesam/errors.hpp"
#include "aesam/models/dataset.hpp"
#include "aesam/models/objective.hpp"

namespace aesam {

enum class Activation { tanh, relu };
enum class LossKind { cross_entropy, squared_error };

inline std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }
inline std::string to_string(LossKind l) {
  return l == LossKind::cross_entropy ? "cross-entropy" : "squared-error";
}
inline Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  throw ConfigError("unknown activation: " + s);
}
inline LossKind loss_from_string(const std::string& s) {
  if (s == "cross-entropy" || s == "xent") return LossKind::cross_entropy;
  if (s == "squared-error" || s == "mse") return LossKind::squared_error;
  throw ConfigError("unknown loss: " + s);
}

struct MlpSpec {
  std::vector<std::size_t> widths;  // input, hidden..., output
  Activation activation = Activation::tanh;
  LossKind loss = LossKind::cross_entropy;

  void validate() const {
    if (widths.size() < 2) throw ConfigError("mlp: need at least input and output widths");
    for (auto w : widths)
      if (w == 0) throw ConfigError("mlp: layer widths must be positive");
  }
  std::size_t input_width() const { return widths.front(); }
  std::size_t output_width() const { return widths.back(); }
  std::size_t layers() const { return widths.size() - 1; }
};

/// Fully connected network. Parameters are laid out [W1, b1, W2, b2, ...]
/// with W_l of shape (fan_in × fan_out).
class Mlp {
public:
  explicit Mlp(MlpSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

  const MlpSpec& spec() const noexcept { return spec_; }

  /// Uniform(−1/√fan_in, 1/√fan_in) weights and biases.
  ParamSet init(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    ParamSet w;
    for (std::size_t l = 0; l < spec_.layers(); ++l) {
      const std::size_t in = spec_.widths[l], out = spec_.widths[l + 1];
      const double bound = 1.0 / std::sqrt(static_cast<double>(in));
      std::uniform_real_distribution<double> u(-bound, bound);
      Tensor W({in, out}), b({out});
      for (double& v : W.data()) v = u(rng);
      for (double& v : b.data()) v = u(rng);
      w.push_back(std::move(W));
      w.push_back(std::move(b));
    }
    return w;
  }

  struct Forward {
    double loss;
    Tape record;
    Tape::Var logits;
  };

  /// Mean per-example loss over the rows `batch` of `data`.
  Forward forward(const ParamSet& w, const LabeledDataset& data,
                  std::span<const std::size_t> batch) const {
    check(w, data);
    if (batch.empty()) throw ConfigError("mlp forward: empty batch");
    Tape tape;
    std::vector<Tape::Var> params;
    params.reserve(w.size());
    for (const auto& t : w) params.push_back(tape.parameter(t));

    Tensor x({batch.size(), data.dim});
    std::vector<int> labels(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto r = data.row(batch[i]);
      std::copy(r.begin(), r.end(), x.data().begin() + static_cast<std::ptrdiff_t>(i * data.dim));
      labels[i] = data.labels[batch[i]];
    }

    Tape::Var h = tape.constant(std::move(x));
    for (std::size_t l = 0; l < spec_.layers(); ++l) {
      h = tape.add_bias(tape.matmul(h, params[2 * l]), params[2 * l + 1]);
      if (l + 1 < spec_.layers())
        h = spec_.activation == Activation::tanh ? tape.tanh(h) : tape.relu(h);
    }
    const Tape::Var logits = h;
    Tape::Var loss;
    if (spec_.loss == LossKind::cross_entropy) {
      loss = tape.softmax_cross_entropy(logits, labels);
    } else {
      Tensor target({batch.size(), spec_.output_width()});
      for (std::size_t i = 0; i < batch.size(); ++i)
        target.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
      loss = tape.squared_error(logits, target);
    }
    const double value = tape.value(loss)[0];
    return Forward{value, std::move(tape), logits};
  }

  Evaluation evaluate(const ParamSet& w, const LabeledDataset& data,
                      std::span<const std::size_t> batch) const {
    Forward f = forward(w, data, batch);
    return Evaluation{f.loss, f.record.backward()};
  }

  double loss(const ParamSet& w, const LabeledDataset& data,
              std::span<const std::size_t> batch) const {
    return forward(w, data, batch).loss;
  }

  struct Score {
    double loss;
    double accuracy;
  };

  /// Loss and argmax accuracy over the whole dataset.
  Score score(const ParamSet& w, const LabeledDataset& data) const {
    const auto all = all_indices(data);
    Forward f = forward(w, data, all);
    const Tensor& z = f.record.value(f.logits);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < z.dim(1); ++j)
        if (z.at(i, j) > z.at(i, best)) best = j;
      if (static_cast<int>(best) == data.labels[i]) ++correct;
    }
    return Score{f.loss, static_cast<double>(correct) / static_cast<double>(data.size())};
  }

  static std::vector<std::size_t> all_indices(const LabeledDataset& data) {
    std::vector<std::size_t> idx(data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return idx;
  }

  /// Throws ConfigError unless `w` and `data` fit this architecture.
  void check(const ParamSet& w, const LabeledDataset& data) const {
    if (data.dim != spec_.input_width())
      throw ConfigError("mlp: input width does not match dataset features");
    if (data.classes != spec_.output_width())
      throw ConfigError("mlp: output width does not match class count");
    if (w.size() != 2 * spec_.layers()) throw ConfigError("mlp: wrong parameter count");
    for (std::size_t l = 0; l < spec_.layers(); ++l) {
      const std::vector<std::size_t> ws{spec_.widths[l], spec_.widths[l + 1]};
      const std::vector<std::size_t> bs{spec_.widths[l + 1]};
      if (w[2 * l].shape() != ws || w[2 * l + 1].shape() != bs)
        throw ConfigError("mlp: parameter shape mismatch");
    }
  }

private:
  MlpSpec spec_;
};

/// Mini-batch objective of an MLP over a fixed dataset.
class MlpObjective {
public:
  MlpObjective(const Mlp& model, const LabeledDataset& data) : model_(&model), data_(&data) {}

  Evaluation evaluate(const ParamSet& w, std::span<const std::size_t> batch) const {
    return model_->evaluate(w, *data_, batch);
  }

  const Mlp& model() const noexcept { return *model_; }
  const LabeledDataset& data() const noexcept { return *data_; }

private:
  const Mlp* model_;
  const LabeledDataset* data_;
};

} // namespace aesam
