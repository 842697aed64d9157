#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "openmix/density.hpp"
#include "openmix/error.hpp"

using namespace openmix;

namespace {

double gauss1(double x, double m) {
  return std::exp(-0.5 * (x - m) * (x - m)) / std::sqrt(2.0 * std::numbers::pi);
}

DensityConfig unit_1d() {
  DensityConfig cfg;
  cfg.sigma = Matrix{{1.0}};
  cfg.mu_bar = {1.0};
  return cfg;
}

}  // namespace

TEST(Density, SpotValuesOneDimension) {
  const auto cfg = unit_1d();
  const std::vector<double> x = {1.5};
  EXPECT_NEAR(density_f(x, cfg), 0.12952, 1e-5);
  EXPECT_NEAR(density_fmix(x, cfg), 0.5 * (0.35207 + 0.01753), 1e-5);
  EXPECT_NEAR(density_fbar(x, cfg), 0.15716, 1e-5);
  EXPECT_NEAR(density_f(x, cfg), gauss1(1.5, 0.0), 1e-15);
  EXPECT_NEAR(density_fmix(x, cfg), 0.5 * (gauss1(1.5, 1.0) + gauss1(1.5, -1.0)), 1e-15);
}

TEST(Density, InteriorPointNotCovered) {
  const auto cfg = unit_1d();
  const std::vector<double> origin = {0.0};
  EXPECT_LT(density_fbar(origin, cfg), density_f(origin, cfg));
}

TEST(Density, BlendIdentity) {
  DensityConfig cfg;
  cfg.sigma = Matrix{{2.0, 0.3}, {0.3, 1.0}};
  cfg.mu_bar = {0.6, 0.8};
  const TheoremDensities dens(cfg);
  for (double a = -3; a <= 3; a += 0.7) {
    for (double b = -3; b <= 3; b += 0.9) {
      const std::vector<double> x = {a, b};
      EXPECT_NEAR(dens.f_bar(x), 0.5 * (dens.f(x) + dens.f_mix(x)), 1e-15);
    }
  }
}

TEST(Density, IntegratesToOne) {
  const auto c1 = unit_1d();
  double s1f = 0, s1m = 0;
  const double h1 = 12.0 / 1200.0;
  for (std::size_t i = 0; i <= 1200; ++i) {
    const std::vector<double> x = {-6.0 + h1 * double(i)};
    s1f += density_f(x, c1) * h1;
    s1m += density_fmix(x, c1) * h1;
  }
  EXPECT_NEAR(s1f, 1.0, 1e-6);
  EXPECT_NEAR(s1m, 1.0, 1e-6);

  DensityConfig c2;
  c2.sigma = Matrix{{1.0, 0.0}, {0.0, 1.0}};
  c2.mu_bar = {1.0, 0.0};
  const TheoremDensities dens(c2);
  double s2f = 0, s2m = 0;
  const std::size_t n = 1201;
  const double h = 14.0 / double(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::vector<double> x = {-7.0 + h * double(i), -7.0 + h * double(j)};
      s2f += dens.f(x) * h * h;
      s2m += dens.f_mix(x) * h * h;
    }
  }
  EXPECT_NEAR(s2f, 1.0, 1e-6);
  EXPECT_NEAR(s2m, 1.0, 1e-6);
}

TEST(Density, InvalidConfigs) {
  DensityConfig cfg;
  cfg.sigma = Matrix{{1.0, 2.0}, {2.0, 1.0}};  // indefinite
  cfg.mu_bar = {1.0, 0.0};
  EXPECT_THROW(TheoremDensities{cfg}, ParameterError);
  cfg.sigma = Matrix{{1.0, 0.0}, {0.0, 1.0}};
  cfg.mu_bar = {1.0, 1.0};
  EXPECT_THROW(TheoremDensities{cfg}, ParameterError);
  cfg.mu_bar = {1.0, 0.0};
  cfg.extent = 1.0;
  EXPECT_THROW(verify_theorem(cfg), UsageError);
}

TEST(Theorem, HoldsInOneDimension) {
  auto cfg = unit_1d();
  const auto r = verify_theorem(cfg);
  EXPECT_TRUE(r.holds);
  EXPECT_GT(r.min_margin, 0.0);
  EXPECT_GT(r.min_gap, 0.0);
  EXPECT_GT(r.points_checked, 0u);
}

TEST(Theorem, HoldsForAnisotropicCovariance) {
  DensityConfig cfg;
  cfg.sigma = Matrix{{1.0, 0.0}, {0.0, 4.0}};
  cfg.mu_bar = {1.0, 0.0};
  cfg.extent = 8.0;
  cfg.resolution = 401;
  const auto r = verify_theorem(cfg);
  EXPECT_TRUE(r.holds);
  EXPECT_GT(r.min_margin, 0.0);
}

TEST(Theorem, BoundaryMatchesClosedForm) {
  // In 1-D with Σ = 1, μ = 1: f̄ > f  ⇔  cosh(x) > e^{1/2}.
  const double b = empirical_boundary(unit_1d(), 1e-4);
  EXPECT_NEAR(b, std::acosh(std::exp(0.5)), 2e-4);
  EXPECT_LT(b, 1.5);
}

TEST(Theorem, RelativeGapSurvivesUnderflow) {
  const TheoremDensities dens(unit_1d());
  const std::vector<double> far = {60.0};
  EXPECT_EQ(dens.f(far), 0.0);
  EXPECT_GT(dens.relative_gap(far), 0.0);
}

TEST(MixHistogram, DegenerateMixing) {
  const std::vector<double> id(1000, 0.0), out(1000, 2.0);
  Rng rng(1);
  HistogramSpec spec{-4.0, 8.0, 120};
  const auto h = empirical_mix_density(id, out, 10.0, 5000, spec, rng, 0.5);
  EXPECT_NEAR(h.mixed_mass(0.9, 1.1), 1.0, 1e-12);
  double total = 0;
  for (double v : h.mixed_density) total += v * h.bin_width();
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(MixHistogram, MixturesFillTheGap) {
  Rng rng(2);
  std::vector<double> id(100000), out(100000);
  for (double& v : id) v = rng.normal();
  for (double& v : out) v = rng.normal(4.0, 1.0);
  const auto h = empirical_mix_density(id, out, 10.0, 100000, HistogramSpec{}, rng);
  EXPECT_GT(h.mixed_mass(1.5, 2.5), h.id_mass(1.5, 2.5));
  double ti = 0, tm = 0;
  for (std::size_t i = 0; i < h.id_density.size(); ++i) {
    ti += h.id_density[i] * h.bin_width();
    tm += h.mixed_density[i] * h.bin_width();
  }
  EXPECT_NEAR(ti, 1.0, 1e-9);
  EXPECT_NEAR(tm, 1.0, 1e-9);
}
