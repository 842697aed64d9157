#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "openmix/matrix.hpp"
#include "openmix/rng.hpp"

namespace openmix {

/// Setting of the low-density theorem: ID density f = N(0, Σ), mixed density
/// f_mix = ½N(+μ, Σ) + ½N(−μ, Σ) with μ = Σ^{1/2}μ̄, ‖μ̄‖ = 1, and the blend
/// f̄ = ½(f + f_mix). The claim checked is f̄ > f wherever |xᵀv| > 1.5 with
/// v = Σ^{−1/2}μ̄.
struct DensityConfig {
  Matrix sigma;
  std::vector<double> mu_bar;
  /// Grid spans [−extent, extent] on every axis with `resolution` points per axis.
  double extent = 6.0;
  std::size_t resolution = 1201;
  /// Points are checked only where |xᵀv| > threshold + margin.
  double margin = 0.0;
  double threshold = 1.5;

  std::size_t dim() const noexcept { return mu_bar.size(); }
};

/// Precomputed Gaussian quantities for a validated configuration.
class TheoremDensities {
 public:
  /// Throws ParameterError if Σ is not symmetric positive-definite or ‖μ̄‖ ≠ 1.
  explicit TheoremDensities(const DensityConfig& cfg);

  double f(std::span<const double> x) const;
  double f_mix(std::span<const double> x) const;
  double f_bar(std::span<const double> x) const;
  /// (f̄ − f) / f, which never underflows and has the sign of f̄ − f.
  double relative_gap(std::span<const double> x) const;
  /// xᵀv.
  double projection(std::span<const double> x) const;

  const std::vector<double>& mu() const noexcept { return mu_; }
  const std::vector<double>& direction() const noexcept { return v_; }

 private:
  double log_gauss(std::span<const double> x, double sign) const;

  std::size_t d_;
  Matrix sigma_inv_;
  double log_norm_;
  std::vector<double> mu_;
  std::vector<double> v_;
};

double density_f(std::span<const double> x, const DensityConfig& cfg);
double density_fmix(std::span<const double> x, const DensityConfig& cfg);
double density_fbar(std::span<const double> x, const DensityConfig& cfg);

struct TheoremReport {
  bool holds = false;
  std::size_t points_checked = 0;
  /// Minimum of (f̄ − f)/f over checked points.
  double min_margin = 0.0;
  /// f̄ − f at the point attaining `min_margin`.
  double min_gap = 0.0;
  std::vector<double> worst_point;
};

/// Grid check of f̄ − f > 0 over the part of the grid inside S′. The sign test
/// uses the relative gap so that far-tail points, where both densities
/// underflow, are still decided correctly.
TheoremReport verify_theorem(const DensityConfig& cfg);

/// Smallest |xᵀv| ≥ 0 (scanned along v in steps of `step`) beyond which f̄ > f
/// holds for the rest of the scan up to `limit`.
double empirical_boundary(const DensityConfig& cfg, double step = 1e-3, double limit = 10.0);

struct HistogramSpec {
  double lo = -4.0;
  double hi = 8.0;
  std::size_t bins = 120;
};

/// Density histograms (each integrates to 1 over the in-range samples).
struct MixHistogram {
  std::vector<double> edges;
  std::vector<double> id_density;
  std::vector<double> mixed_density;
  std::size_t mixed_out_of_range = 0;
  std::size_t id_out_of_range = 0;

  double bin_width() const noexcept { return edges.size() > 1 ? edges[1] - edges[0] : 0.0; }
  /// Mass of bins whose centers fall in [lo, hi].
  double id_mass(double lo, double hi) const;
  double mixed_mass(double lo, double hi) const;
};

/// Histogram of x̆ = λx + (1−λ)x̃ for `n_mix` random (ID, outlier) pairs,
/// λ ~ Beta(α, α) unless `fixed_lambda` is set, next to the ID-only histogram.
MixHistogram empirical_mix_density(std::span<const double> id_samples,
                                   std::span<const double> outlier_samples, double alpha,
                                   std::size_t n_mix, const HistogramSpec& bins, Rng& rng,
                                   std::optional<double> fixed_lambda = std::nullopt);

}  // namespace openmix
