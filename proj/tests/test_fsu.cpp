#include <gtest/gtest.h>

#include <cmath>

#include <json.hpp>

#include "openmix/error.hpp"
#include "openmix/fsu.hpp"
#include "support.hpp"

using namespace openmix;

TEST(Fsu, OneDimensionalHandCase) {
  const Matrix f{{0.0}, {2.0}, {10.0}, {12.0}};
  const std::vector<std::size_t> y = {0, 0, 1, 1};
  Rng rng(1);
  const auto r = fsu_from_features(f, y, 2, 100, rng);
  EXPECT_EQ(r.pi_intra, 2.0);
  EXPECT_EQ(r.pi_inter, 10.0);
  EXPECT_EQ(r.pi_fsu, 0.2);
  EXPECT_EQ(r.class_means, (Matrix{{1.0}, {11.0}}));
  EXPECT_EQ(r.z_intra, 2u);
  EXPECT_EQ(r.z_inter, 2u);
}

TEST(Fsu, CollapsedClasses) {
  const Matrix f{{1.0, 1.0}, {1.0, 1.0}, {4.0, 5.0}, {4.0, 5.0}};
  Rng rng(1);
  const auto r = fsu_from_features(f, std::vector<std::size_t>{0, 0, 1, 1}, 2, 100, rng);
  EXPECT_EQ(r.pi_intra, 0.0);
  EXPECT_EQ(r.pi_fsu, 0.0);
  EXPECT_EQ(r.pi_inter, 5.0);
}

TEST(Fsu, Errors) {
  Rng rng(1);
  const Matrix f{{0.0}, {1.0}, {2.0}};
  EXPECT_THROW(fsu_from_features(f, std::vector<std::size_t>{0, 0, 1}, 2, 10, rng), UsageError);
  EXPECT_THROW(fsu_from_features(f, std::vector<std::size_t>{0, 0}, 2, 10, rng), DimensionError);
  EXPECT_THROW(fsu_from_features(f, std::vector<std::size_t>{0, 0, 0}, 1, 10, rng), UsageError);
}

TEST(Fsu, InvariantUnderSimilarityTransforms) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 2 + rng.index(4);
    const auto f = openmix::testing::random_matrix(60, d, rng);
    std::vector<std::size_t> y(60);
    for (std::size_t i = 0; i < 60; ++i) y[i] = i % 3;
    // Random orthogonal matrix from Gram-Schmidt on a Gaussian matrix.
    auto q = openmix::testing::random_matrix(d, d, rng);
    for (std::size_t c = 0; c < d; ++c) {
      for (std::size_t p = 0; p < c; ++p) {
        double dot = 0;
        for (std::size_t r = 0; r < d; ++r) dot += q(r, c) * q(r, p);
        for (std::size_t r = 0; r < d; ++r) q(r, c) -= dot * q(r, p);
      }
      double n = 0;
      for (std::size_t r = 0; r < d; ++r) n += q(r, c) * q(r, c);
      for (std::size_t r = 0; r < d; ++r) q(r, c) /= std::sqrt(n);
    }
    const double scale = 0.1 + 10.0 * rng.uniform();
    auto g = matmul(f, q);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      for (std::size_t j = 0; j < d; ++j) g(i, j) = scale * g(i, j) + 3.0 * double(j) - 1.0;
    }
    Rng r1(5), r2(5);
    const double a = fsu_from_features(f, y, 3, 1000, r1).pi_fsu;
    const double b = fsu_from_features(g, y, 3, 1000, r2).pi_fsu;
    EXPECT_NEAR(a, b, 1e-10 * a);
  }
}

TEST(Fsu, SubsampledAgreesWithExhaustive) {
  Rng rng(3);
  auto f = openmix::testing::random_matrix(600, 3, rng);
  std::vector<std::size_t> y(600);
  for (std::size_t i = 0; i < 600; ++i) {
    y[i] = i % 3;
    f(i, 0) += 4.0 * double(y[i]);
  }
  Rng r1(1);
  const auto exact = fsu_from_features(f, y, 3, 1'000'000, r1);
  EXPECT_EQ(exact.z_intra, 3u * 200 * 199 / 2);
  // Standard deviation of the pair distances, for the Monte-Carlo tolerance.
  double s = 0, s2 = 0, n = 0;
  for (std::size_t a = 0; a < 600; ++a) {
    for (std::size_t b = a + 1; b < 600; ++b) {
      if (y[a] != y[b]) continue;
      double d = 0;
      for (std::size_t j = 0; j < 3; ++j) d += (f(a, j) - f(b, j)) * (f(a, j) - f(b, j));
      d = std::sqrt(d);
      s += d;
      s2 += d * d;
      n += 1;
    }
  }
  const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
  Rng r2(2);
  const auto sub = fsu_from_features(f, y, 3, 3000, r2);
  EXPECT_EQ(sub.z_intra, 9000u);
  EXPECT_NEAR(sub.pi_intra, exact.pi_intra, 3.0 * sd / std::sqrt(9000.0));
  EXPECT_EQ(sub.pi_inter, exact.pi_inter);
}

TEST(Fsu, ModelUsesPenultimateFeatures) {
  // Hidden layer copies the input through ReLU; the output layer is irrelevant.
  DenseLayer hidden{Matrix{{1.0}}, {0.0}};
  DenseLayer out{Matrix{{5.0, -3.0}}, {1.0, 2.0}};
  MlpModel model(std::vector<DenseLayer>{hidden, out});
  LabeledDataset ds{Matrix{{0.0}, {2.0}, {10.0}, {12.0}}, {0, 0, 1, 1}, 2};
  Rng rng(1);
  EXPECT_EQ(fsu(model, ds, 100, rng).pi_fsu, 0.2);
}

TEST(Fsu, JsonReport) {
  Rng rng(1);
  const auto r = fsu_from_features(Matrix{{0.0}, {2.0}, {10.0}, {12.0}},
                                   std::vector<std::size_t>{0, 0, 1, 1}, 2, 100, rng);
  const auto j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j["pi_fsu"].get<double>(), 0.2);
  EXPECT_EQ(j["class_means"][1][0].get<double>(), 11.0);
  EXPECT_EQ(j["z_inter"].get<std::size_t>(), 2u);
}
