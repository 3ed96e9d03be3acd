#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "aesam/adcore/finite_diff.hpp"
#include "aesam/models/batching.hpp"
#include "aesam/models/dataset.hpp"
#include "aesam/models/landscape.hpp"
#include "aesam/models/mlp.hpp"
#include "aesam/models/noise.hpp"
#include "support.hpp"

using namespace aesam;
using aesam::testing::random_tensor;

namespace {

std::vector<AnalyticLandscape> all_landscapes(std::size_t d) {
  std::vector<double> eig(d);
  for (std::size_t i = 0; i < d; ++i) eig[i] = -1.0 + 4.0 * static_cast<double>(i) / static_cast<double>(d);
  std::vector<double> diag(d);
  for (std::size_t i = 0; i < d; ++i) diag[i] = 0.5 + static_cast<double>(i);
  return {AnalyticLandscape::quadratic(d), AnalyticLandscape::quadratic(eig, 9),
          AnalyticLandscape::scaled_quadratic(diag), AnalyticLandscape::nonconvex_wells(d),
          AnalyticLandscape::nonconvex_wells(d, 0.3, 2.0, 1.5)};
}

} // namespace

TEST(Dataset, SameSeedSameBlobs) {
  EXPECT_EQ(make_dataset(DatasetKind::blobs, 100, 7), make_dataset(DatasetKind::blobs, 100, 7));
  EXPECT_NE(make_dataset(DatasetKind::blobs, 100, 7), make_dataset(DatasetKind::blobs, 100, 8));
}

TEST(Dataset, TwoMoonsIsBalanced) {
  const auto d = make_dataset(DatasetKind::two_moons, 200, 3);
  EXPECT_EQ(std::count(d.labels.begin(), d.labels.end(), 0), 100);
  EXPECT_EQ(std::count(d.labels.begin(), d.labels.end(), 1), 100);
  EXPECT_EQ(d.dim, 2u);
}

TEST(Dataset, TooFewExamplesRejected) {
  DatasetOptions o;
  o.classes = 4;
  EXPECT_THROW(make_dataset(DatasetKind::blobs, 7, 0, o), ConfigError);
}

TEST(Dataset, CsvRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "aesam_models_roundtrip.csv";
  const auto d = make_dataset(DatasetKind::blobs, 60, 2);
  write_dataset_csv(d, path.string());
  auto back = read_dataset_csv(path.string());
  back.provenance = d.provenance;
  EXPECT_EQ(back, d);
  std::filesystem::remove(path);
}

TEST(Noise, ZeroNoiseIsIdentity) {
  const auto d = make_dataset(DatasetKind::blobs, 500, 1);
  EXPECT_EQ(inject_label_noise(d, {0.0, 4}), d);
}

TEST(Noise, ForcedFlipWithTwoClasses) {
  const auto d = make_dataset(DatasetKind::two_moons, 300, 1);
  const auto n = inject_label_noise(d, {1.0, 4});
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(n.labels[i], 1 - d.labels[i]);
}

TEST(Noise, FlipCountWithinBinomialBand) {
  const auto d = make_dataset(DatasetKind::blobs, 10000, 1);
  const auto n = inject_label_noise(d, {0.4, 2024});
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < d.size(); ++i) flipped += d.labels[i] != n.labels[i];
  // 4000 ± 3·sqrt(10000·0.4·0.6)
  const double sd = std::sqrt(10000 * 0.4 * 0.6);
  EXPECT_GE(static_cast<double>(flipped), std::ceil(4000 - 3 * sd));
  EXPECT_LE(static_cast<double>(flipped), std::floor(4000 + 3 * sd));
  EXPECT_EQ(n.features, d.features);
  for (int y : n.labels) EXPECT_TRUE(y >= 0 && y < static_cast<int>(d.classes));
}

TEST(Noise, InvalidProbabilityRejected) {
  const auto d = make_dataset(DatasetKind::blobs, 20, 1);
  EXPECT_THROW(inject_label_noise(d, {1.5, 0}), ConfigError);
}

TEST(Landscape, IdentityQuadratic) {
  const auto l = AnalyticLandscape::quadratic(2);
  const auto v = landscape_eval(l, Tensor::vector({3, 4}));
  EXPECT_EQ(v.value, 12.5);
  EXPECT_EQ(v.gradient, Tensor::vector({3, 4}));
  EXPECT_EQ(l.beta(), 1.0);
}

TEST(Landscape, ScaledQuadratic) {
  const auto l = AnalyticLandscape::scaled_quadratic({1, 4});
  const auto v = l.eval(Tensor::vector({1, 1}));
  EXPECT_EQ(v.value, 2.5);
  EXPECT_EQ(v.gradient, Tensor::vector({1, 4}));
  EXPECT_EQ(l.beta(), 4.0);
}

TEST(Landscape, WellsStationaryPoint) {
  // a·0 + bω·sin(0) = 0 in every coordinate
  const auto l = AnalyticLandscape::nonconvex_wells(3);
  const auto v = l.eval(Tensor::vector({0, 0, 0}));
  EXPECT_EQ(v.gradient, Tensor::vector({0, 0, 0}));
}

TEST(Landscape, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(17);
  for (const auto& l : all_landscapes(6)) {
    for (int i = 0; i < 100; ++i) {
      const ParamSet w{random_tensor({6}, rng, 2.0)};
      const ParamSet g{l.eval(w[0]).gradient};
      const ParamSet fd = finite_diff_grad([&](const ParamSet& p) { return l.value(p[0]); }, w);
      EXPECT_LE(tensor_ops::relative_error(g, fd), 1e-6) << to_string(l.kind());
    }
  }
}

TEST(Landscape, BetaSmoothnessOnRandomPairs) {
  std::mt19937_64 rng(23);
  for (const auto& l : all_landscapes(8)) {
    for (int i = 0; i < 1000; ++i) {
      const double scale = i % 2 ? 0.01 : 3.0;
      const Tensor w = random_tensor({8}, rng, 3.0);
      Tensor v = w;
      const Tensor step = random_tensor({8}, rng, scale);
      for (std::size_t j = 0; j < 8; ++j) v[j] += step[j];
      const ParamSet gw{l.eval(w).gradient}, gv{l.eval(v).gradient};
      const double lhs = tensor_ops::norm(tensor_ops::add_scaled(gw, -1.0, gv));
      const double rhs = l.beta() * tensor_ops::norm(ParamSet{step});
      EXPECT_LE(lhs, rhs * (1 + 1e-9)) << to_string(l.kind());
    }
  }
}

TEST(Landscape, RotatedQuadraticBetaIsSpectralRadius) {
  const std::vector<double> eig{0.5, -3.0, 2.0};
  const auto l = AnalyticLandscape::quadratic(eig, 4);
  EXPECT_DOUBLE_EQ(l.beta(), 3.0);
}

TEST(Batching, SingleBatchHoldsEverything) {
  const auto b = minibatch_iter(50, 50, 1, 0);
  ASSERT_EQ(b.size(), 1u);
  auto s = b[0];
  std::sort(s.begin(), s.end());
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(s[i], i);
}

TEST(Batching, DeterministicAndPartitioning) {
  EXPECT_EQ(minibatch_iter(103, 10, 4, 2), minibatch_iter(103, 10, 4, 2));
  EXPECT_NE(minibatch_iter(103, 10, 4, 2), minibatch_iter(103, 10, 4, 3));
  const auto b = minibatch_iter(103, 10, 4, 2);
  EXPECT_EQ(b.size(), batches_per_epoch(103, 10));
  EXPECT_EQ(b.back().size(), 3u);
  std::vector<std::size_t> all;
  for (const auto& x : b) all.insert(all.end(), x.begin(), x.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 103; ++i) EXPECT_EQ(all[i], i);
}

TEST(Batching, InvalidBatchSize) {
  EXPECT_THROW(minibatch_iter(10, 0, 0, 0), ConfigError);
  EXPECT_THROW(minibatch_iter(10, 11, 0, 0), ConfigError);
}

class MlpGradient : public ::testing::TestWithParam<std::tuple<Activation, LossKind>> {};

TEST_P(MlpGradient, MatchesFiniteDifferencesAt20Points) {
  const auto [act, loss] = GetParam();
  DatasetOptions o;
  o.dim = 3;
  o.classes = 3;
  const auto data = make_dataset(DatasetKind::blobs, 40, 5, o);
  const Mlp mlp(MlpSpec{{3, 5, 4, 3}, act, loss});
  const std::vector<std::size_t> batch{0, 3, 7, 11, 19, 23, 31};
  for (std::uint64_t s = 0; s < 20; ++s) {
    const ParamSet w = mlp.init(s);
    const ParamSet g = mlp.evaluate(w, data, batch).grad;
    const ParamSet fd = finite_diff_grad([&](const ParamSet& p) { return mlp.loss(p, data, batch); }, w);
    EXPECT_LE(tensor_ops::relative_error(g, fd), 1e-4);
  }
}

INSTANTIATE_TEST_SUITE_P(All, MlpGradient,
                         ::testing::Combine(::testing::Values(Activation::tanh, Activation::relu),
                                            ::testing::Values(LossKind::cross_entropy, LossKind::squared_error)));

TEST(Mlp, ShapeMismatchRejected) {
  const auto data = make_dataset(DatasetKind::blobs, 40, 5);
  const Mlp mlp(MlpSpec{{3, 4, 2}});
  EXPECT_THROW(mlp.evaluate(mlp.init(0), data, std::vector<std::size_t>{0}), ConfigError);
}

TEST(Mlp, InitIsSeededAndBounded) {
  const Mlp mlp(MlpSpec{{10, 64, 4}});
  const auto w = mlp.init(3);
  EXPECT_EQ(w, mlp.init(3));
  for (double v : w[0].data()) EXPECT_LE(std::abs(v), 1.0 / std::sqrt(10.0));
  for (double v : w[2].data()) EXPECT_LE(std::abs(v), 1.0 / 8.0);
}
