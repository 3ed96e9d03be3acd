#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "aesam/errors.hpp"
#include "aesam/models/dataset.hpp"
#include "aesam/models/landscape.hpp"
#include "aesam/models/mlp.hpp"
#include "aesam/optim/optimizer.hpp"

namespace aesam {

namespace fmt_detail {

/// Shortest round-trip representation.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s, std::string_view key) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw ConfigError("config: '" + std::string(key) + "' expects a number, got '" + std::string(s) + "'");
  return v;
}

inline std::uint64_t parse_uint(std::string_view s, std::string_view key) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw ConfigError("config: '" + std::string(key) + "' expects a non-negative integer, got '" +
                      std::string(s) + "'");
  return v;
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v[i]);
  }
  return out;
}

} // namespace fmt_detail

enum class ModelKind { mlp, landscape };

inline std::string to_string(ModelKind m) { return m == ModelKind::mlp ? "mlp" : "landscape"; }

/// Everything needed to reproduce one experiment cell. Serialized as flat
/// `key = value` text; see ExperimentConfig::keys() for the schema.
struct ExperimentConfig {
  Algorithm algorithm = Algorithm::ae_sam;

  // data
  DatasetKind dataset = DatasetKind::blobs;
  std::string dataset_path;
  std::uint64_t n = 2000;        // training pool, before the validation split
  std::uint64_t n_test = 1000;   // clean held-out split
  std::uint64_t features = 10;
  std::uint64_t classes = 4;
  double cluster_std = 1.0;
  double center_scale = 1.0;
  std::uint64_t data_seed = 1;
  double val_fraction = 0.1;

  // model
  ModelKind model = ModelKind::mlp;
  std::vector<std::uint64_t> hidden{64, 64};
  Activation activation = Activation::tanh;
  LossKind loss = LossKind::cross_entropy;
  LandscapeKind landscape = LandscapeKind::quadratic;
  std::uint64_t landscape_dim = 10;
  double init_scale = 1.0;  // landscape starting point: N(0, init_scale²) per coordinate

  // optimizer
  double eta = 0.1;
  double rho = 0.05;
  double alpha = 0.7;
  std::uint64_t k = 5;
  double p = 0.5;
  double delta = 0.9;
  double lambda1 = -1.0;
  double lambda2 = 1.0;
  PerturbationMode perturbation = PerturbationMode::normalized;
  LrSchedule lr_schedule = LrSchedule::constant;

  // loop
  std::uint64_t batch_size = 128;
  std::uint64_t epochs = 50;
  double noise = 0.0;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::string output_dir = "out";
  std::uint64_t diag_samples = 0;
  std::uint64_t thin_threshold = 100000;
  std::uint64_t thin_every = 10;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

  struct Key {
    const char* name;
    const char* help;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
  };

  /// The documented schema, in serialization order.
  static const std::vector<Key>& keys();

  void set(const std::string& key, const std::string& value) {
    for (const auto& k : keys())
      if (key == k.name) {
        k.set(*this, fmt_detail::trim(value));
        return;
      }
    throw ConfigError("config: unknown key '" + key + "'");
  }

  std::string get(const std::string& key) const {
    for (const auto& k : keys())
      if (key == k.name) return k.get(*this);
    throw ConfigError("config: unknown key '" + key + "'");
  }

  std::size_t train_size() const;
  std::size_t batches_per_epoch() const;
  /// T = epochs × batches per epoch.
  std::uint64_t total_steps() const { return epochs * batches_per_epoch(); }

  MlpSpec mlp_spec() const {
    MlpSpec s;
    s.widths.push_back(input_width());
    for (auto h : hidden) s.widths.push_back(h);
    s.widths.push_back(output_width());
    s.activation = activation;
    s.loss = loss;
    return s;
  }

  std::size_t input_width() const { return dataset == DatasetKind::two_moons ? 2 : features; }
  std::size_t output_width() const { return dataset == DatasetKind::two_moons ? 2 : classes; }

  OptimizerConfig optimizer_config(std::uint64_t seed) const {
    OptimizerConfig c;
    c.algorithm = algorithm;
    c.eta = eta;
    c.rho = rho;
    c.alpha = alpha;
    c.k = k;
    c.p = p;
    c.delta = delta;
    c.lambda1 = lambda1;
    c.lambda2 = lambda2;
    c.total_steps = total_steps();
    c.perturbation = perturbation;
    c.lr_schedule = lr_schedule;
    c.seed = seed;
    return c;
  }

  void validate() const {
    optimizer_config(0).validate();
    if (epochs == 0) throw ConfigError("config: epochs must be positive");
    if (batch_size == 0) throw ConfigError("config: batch_size must be positive");
    if (!(noise >= 0.0 && noise <= 1.0)) throw ConfigError("config: noise outside [0,1]");
    if (!(val_fraction >= 0.0 && val_fraction < 1.0))
      throw ConfigError("config: val_fraction outside [0,1)");
    if (seeds.empty()) throw ConfigError("config: seeds must not be empty");
    if (thin_every == 0) throw ConfigError("config: thin_every must be positive");
    if (model == ModelKind::mlp) {
      if (dataset == DatasetKind::file && dataset_path.empty())
        throw ConfigError("config: dataset=file needs dataset_path");
      if (n_test < 1) throw ConfigError("config: n_test must be positive");
      if (input_width() == 0 || output_width() < 2)
        throw ConfigError("config: need features >= 1 and classes >= 2");
      for (auto h : hidden)
        if (h == 0) throw ConfigError("config: hidden widths must be positive");
      if (batch_size > train_size())
        throw ConfigError("config: batch_size exceeds training split size");
    } else if (landscape_dim == 0) {
      throw ConfigError("config: landscape_dim must be positive");
    }
    if (total_steps() == 0) throw ConfigError("config: T must be positive");
  }

  std::string to_text() const {
    std::string out;
    for (const auto& k : keys()) {
      out += k.name;
      out += " = ";
      out += k.get(*this);
      out += '\n';
    }
    return out;
  }

  /// `key = value` lines; blank lines and `#` comments ignored.
  static ExperimentConfig from_text(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = fmt_detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
      c.set(fmt_detail::trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    return c;
  }

  static ExperimentConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    for (const auto& k : keys()) j[k.name] = k.get(*this);
    return j;
  }
};

inline std::size_t ExperimentConfig::train_size() const {
  if (model == ModelKind::landscape) return 1;
  const auto pool = static_cast<double>(n);
  const auto val = static_cast<std::size_t>(pool * val_fraction);
  return n - val;
}

inline std::size_t ExperimentConfig::batches_per_epoch() const {
  if (model == ModelKind::landscape || batch_size == 0) return 1;
  return (train_size() + batch_size - 1) / batch_size;
}

inline const std::vector<ExperimentConfig::Key>& ExperimentConfig::keys() {
  using C = ExperimentConfig;
  using namespace fmt_detail;
  auto dbl = [](double C::*m, const char* name, const char* help) {
    return Key{name, help, [m](const C& c) { return format_double(c.*m); },
               [m, name](C& c, const std::string& v) { c.*m = parse_double(v, name); }};
  };
  auto u64 = [](std::uint64_t C::*m, const char* name, const char* help) {
    return Key{name, help, [m](const C& c) { return std::to_string(c.*m); },
               [m, name](C& c, const std::string& v) { c.*m = parse_uint(v, name); }};
  };
  auto u64list = [](std::vector<std::uint64_t> C::*m, const char* name, const char* help) {
    return Key{name, help,
               [m](const C& c) { return join(c.*m, [](std::uint64_t x) { return std::to_string(x); }); },
               [m, name](C& c, const std::string& v) {
                 (c.*m).clear();
                 if (v.empty()) return;
                 for (const auto& part : split(v, ',')) (c.*m).push_back(parse_uint(part, name));
               }};
  };

  static const std::vector<Key> table = {
      {"algorithm", "erm | sam | ss-sam | looksam | ae-sam | ae-looksam",
       [](const C& c) { return to_string(c.algorithm); },
       [](C& c, const std::string& v) { c.algorithm = algorithm_from_string(v); }},
      {"dataset", "blobs | two-moons | file", [](const C& c) { return to_string(c.dataset); },
       [](C& c, const std::string& v) { c.dataset = dataset_kind_from_string(v); }},
      {"dataset_path", "CSV dataset when dataset = file", [](const C& c) { return c.dataset_path; },
       [](C& c, const std::string& v) { c.dataset_path = v; }},
      u64(&C::n, "n", "training pool size (before validation split)"),
      u64(&C::n_test, "n_test", "clean test split size"),
      u64(&C::features, "features", "blobs feature dimension"),
      u64(&C::classes, "classes", "blobs class count"),
      dbl(&C::cluster_std, "cluster_std", "per-coordinate blob noise / moon jitter"),
      dbl(&C::center_scale, "center_scale", "spread of blob centers"),
      u64(&C::data_seed, "data_seed", "seed of the generated dataset and split"),
      dbl(&C::val_fraction, "val_fraction", "fraction of the pool held out for validation"),
      {"model", "mlp | landscape", [](const C& c) { return to_string(c.model); },
       [](C& c, const std::string& v) {
         if (v == "mlp") c.model = ModelKind::mlp;
         else if (v == "landscape") c.model = ModelKind::landscape;
         else throw ConfigError("unknown model: " + v);
       }},
      u64list(&C::hidden, "hidden", "comma-separated hidden widths"),
      {"activation", "tanh | relu", [](const C& c) { return to_string(c.activation); },
       [](C& c, const std::string& v) { c.activation = activation_from_string(v); }},
      {"loss", "cross-entropy | squared-error", [](const C& c) { return to_string(c.loss); },
       [](C& c, const std::string& v) { c.loss = loss_from_string(v); }},
      {"landscape", "quadratic | scaled-quadratic | nonconvex-wells",
       [](const C& c) { return to_string(c.landscape); },
       [](C& c, const std::string& v) { c.landscape = landscape_kind_from_string(v); }},
      u64(&C::landscape_dim, "landscape_dim", "landscape dimension"),
      dbl(&C::init_scale, "init_scale", "landscape starting-point scale"),
      dbl(&C::eta, "eta", "step size"),
      dbl(&C::rho, "rho", "perturbation radius"),
      dbl(&C::alpha, "alpha", "LookSAM reuse coefficient"),
      u64(&C::k, "k", "LookSAM period"),
      dbl(&C::p, "p", "SS-SAM Bernoulli probability"),
      dbl(&C::delta, "delta", "EMA forgetting rate"),
      dbl(&C::lambda1, "lambda1", "threshold at the end of training"),
      dbl(&C::lambda2, "lambda2", "threshold at the start of training"),
      {"perturbation", "normalized | raw", [](const C& c) { return to_string(c.perturbation); },
       [](C& c, const std::string& v) { c.perturbation = perturbation_mode_from_string(v); }},
      {"lr_schedule", "constant | cosine", [](const C& c) { return to_string(c.lr_schedule); },
       [](C& c, const std::string& v) { c.lr_schedule = lr_schedule_from_string(v); }},
      u64(&C::batch_size, "batch_size", "mini-batch size b"),
      u64(&C::epochs, "epochs", "training epochs"),
      dbl(&C::noise, "noise", "training label flip probability"),
      u64list(&C::seeds, "seeds", "comma-separated run seeds"),
      {"output_dir", "report directory", [](const C& c) { return c.output_dir; },
       [](C& c, const std::string& v) { c.output_dir = v; }},
      u64(&C::diag_samples, "diag_samples", "squared-norm samples taken at the end of each run (0 = off)"),
      u64(&C::thin_threshold, "thin_threshold", "keep every thin_every-th step trace above this T"),
      u64(&C::thin_every, "thin_every", "trace thinning stride"),
  };
  return table;
}

} // namespace aesam
