#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aesam/errors.hpp"

namespace aesam {

enum class DatasetKind { blobs, two_moons, file };

inline std::string to_string(DatasetKind k) {
  switch (k) {
  case DatasetKind::blobs: return "blobs";
  case DatasetKind::two_moons: return "two-moons";
  case DatasetKind::file: return "file";
  }
  return "?";
}

inline DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "blobs" || s == "synthetic-blobs") return DatasetKind::blobs;
  if (s == "two-moons" || s == "moons") return DatasetKind::two_moons;
  if (s == "file") return DatasetKind::file;
  throw ConfigError("unknown dataset kind: " + s);
}

/// Rows of features plus integer class labels in [0, classes).
struct LabeledDataset {
  std::size_t dim = 0;
  std::size_t classes = 0;
  std::vector<double> features;
  std::vector<int> labels;
  DatasetKind provenance = DatasetKind::blobs;

  std::size_t size() const noexcept { return labels.size(); }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * dim, dim);
  }

  void validate() const {
    if (features.size() != labels.size() * dim)
      throw ConfigError("dataset: feature matrix does not match label count");
    for (int y : labels)
      if (y < 0 || static_cast<std::size_t>(y) >= classes)
        throw ConfigError("dataset: label out of range");
  }

  /// Rows at `indices`, in that order.
  LabeledDataset subset(std::span<const std::size_t> indices) const {
    LabeledDataset out{dim, classes, {}, {}, provenance};
    out.features.reserve(indices.size() * dim);
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) {
      const auto r = row(i);
      out.features.insert(out.features.end(), r.begin(), r.end());
      out.labels.push_back(labels[i]);
    }
    return out;
  }

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

/// Shape of the synthetic generators. Ignored fields are harmless.
struct DatasetOptions {
  std::size_t dim = 10;        // blobs only; two-moons is always 2-D
  std::size_t classes = 4;     // blobs only; two-moons is always 2 classes
  double cluster_std = 1.0;    // per-coordinate noise (blobs) or jitter (two-moons)
  double center_scale = 1.0;   // spread of blob centers
};

namespace detail {

inline LabeledDataset make_blobs(std::size_t n, std::uint64_t seed, const DatasetOptions& opt) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> centers(opt.classes * opt.dim);
  for (double& c : centers) c = opt.center_scale * normal(rng);

  LabeledDataset ds{opt.dim, opt.classes, {}, {}, DatasetKind::blobs};
  ds.features.reserve(n * opt.dim);
  ds.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % opt.classes;
    for (std::size_t j = 0; j < opt.dim; ++j)
      ds.features.push_back(centers[c * opt.dim + j] + opt.cluster_std * normal(rng));
    ds.labels.push_back(static_cast<int>(c));
  }
  return ds;
}

inline LabeledDataset make_two_moons(std::size_t n, std::uint64_t seed, const DatasetOptions& opt) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::normal_distribution<double> jitter(0.0, opt.cluster_std);

  LabeledDataset ds{2, 2, {}, {}, DatasetKind::two_moons};
  ds.features.reserve(2 * n);
  ds.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 2);
    const double t = angle(rng);
    double x = std::cos(t), y = std::sin(t);
    if (c == 1) {
      x = 1.0 - x;
      y = 0.5 - y;
    }
    ds.features.push_back(x + jitter(rng));
    ds.features.push_back(y + jitter(rng));
    ds.labels.push_back(c);
  }
  return ds;
}

} // namespace detail

/// Deterministic synthetic dataset; labels cycle through the classes so the
/// class counts differ by at most one.
inline LabeledDataset make_dataset(DatasetKind kind, std::size_t n, std::uint64_t seed,
                                   const DatasetOptions& opt = {}) {
  switch (kind) {
  case DatasetKind::blobs:
    if (opt.classes < 2 || opt.dim < 1) throw ConfigError("blobs: need >= 2 classes and dim >= 1");
    if (n < 2 * opt.classes) throw ConfigError("make_dataset: need at least 2 examples per class");
    return detail::make_blobs(n, seed, opt);
  case DatasetKind::two_moons:
    if (n < 4) throw ConfigError("make_dataset: need at least 2 examples per class");
    return detail::make_two_moons(n, seed, opt);
  case DatasetKind::file:
    throw ConfigError("make_dataset: file datasets are loaded with read_dataset_csv");
  }
  throw ConfigError("make_dataset: unknown kind");
}

/// Header `# features=<d> classes=<k>`, then one `f1,...,fd,label` row per example.
inline void write_dataset_csv(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "# features=" << ds.dim << " classes=" << ds.classes << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.row(i)) out << v << ',';
    out << ds.labels[i] << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline LabeledDataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty dataset file " + path);

  LabeledDataset ds;
  ds.provenance = DatasetKind::file;
  if (std::sscanf(line.c_str(), "# features=%zu classes=%zu", &ds.dim, &ds.classes) != 2)
    throw ConfigError("dataset file: bad header line: " + line);

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != ds.dim + 1)
      throw ConfigError("dataset file: wrong column count on line " + std::to_string(lineno));
    for (std::size_t j = 0; j < ds.dim; ++j) ds.features.push_back(std::stod(cells[j]));
    ds.labels.push_back(std::stoi(cells[ds.dim]));
  }
  ds.validate();
  return ds;
}

} // namespace aesam
