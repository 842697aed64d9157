#include "openmix/density.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "openmix/error.hpp"

namespace openmix {

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  }
  return out;
}

}  // namespace

TheoremDensities::TheoremDensities(const DensityConfig& cfg) : d_(cfg.dim()) {
  if (d_ == 0) throw ParameterError("density dimension must be positive");
  if (cfg.sigma.rows() != d_ || cfg.sigma.cols() != d_) {
    throw ParameterError("sigma must be " + std::to_string(d_) + "x" + std::to_string(d_));
  }
  double norm2 = 0.0;
  for (double v : cfg.mu_bar) norm2 += v * v;
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12) throw ParameterError("mu_bar must have unit norm");

  const Eigen::MatrixXd sigma = to_eigen(cfg.sigma);
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) throw ParameterError("sigma must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw ParameterError("sigma must be positive-definite");
  }
  const Eigen::VectorXd evals = eig.eigenvalues();
  const Eigen::MatrixXd evecs = eig.eigenvectors();
  const Eigen::MatrixXd sqrt_sigma = evecs * evals.cwiseSqrt().asDiagonal() * evecs.transpose();
  const Eigen::MatrixXd inv_sqrt_sigma =
      evecs * evals.cwiseSqrt().cwiseInverse().asDiagonal() * evecs.transpose();
  const Eigen::MatrixXd inv_sigma = evecs * evals.cwiseInverse().asDiagonal() * evecs.transpose();

  Eigen::VectorXd mu_bar(d_);
  for (std::size_t i = 0; i < d_; ++i) mu_bar(i) = cfg.mu_bar[i];
  const Eigen::VectorXd mu = sqrt_sigma * mu_bar;
  const Eigen::VectorXd v = inv_sqrt_sigma * mu_bar;

  sigma_inv_ = Matrix(d_, d_);
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j = 0; j < d_; ++j) sigma_inv_(i, j) = inv_sigma(i, j);
  }
  mu_.assign(mu.data(), mu.data() + d_);
  v_.assign(v.data(), v.data() + d_);
  const double log_det = evals.array().log().sum();
  log_norm_ = -0.5 * (static_cast<double>(d_) * std::log(2.0 * std::numbers::pi) + log_det);
}

double TheoremDensities::log_gauss(std::span<const double> x, double sign) const {
  if (x.size() != d_) throw DimensionError("density point has wrong dimension");
  // Quadratic form (x − sign·μ)ᵀ Σ⁻¹ (x − sign·μ).
  double q = 0.0;
  for (std::size_t i = 0; i < d_; ++i) {
    const double di = x[i] - sign * mu_[i];
    for (std::size_t j = 0; j < d_; ++j) q += di * sigma_inv_(i, j) * (x[j] - sign * mu_[j]);
  }
  return log_norm_ - 0.5 * q;
}

double TheoremDensities::f(std::span<const double> x) const { return std::exp(log_gauss(x, 0.0)); }

double TheoremDensities::f_mix(std::span<const double> x) const {
  return 0.5 * std::exp(log_gauss(x, 1.0)) + 0.5 * std::exp(log_gauss(x, -1.0));
}

double TheoremDensities::f_bar(std::span<const double> x) const { return 0.5 * (f(x) + f_mix(x)); }

double TheoremDensities::relative_gap(std::span<const double> x) const {
  const double base = log_gauss(x, 0.0);
  const double ratio =
      0.5 * std::exp(log_gauss(x, 1.0) - base) + 0.5 * std::exp(log_gauss(x, -1.0) - base);
  return 0.5 * (ratio - 1.0);
}

double TheoremDensities::projection(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < d_; ++i) s += x[i] * v_[i];
  return s;
}

double density_f(std::span<const double> x, const DensityConfig& cfg) {
  return TheoremDensities(cfg).f(x);
}

double density_fmix(std::span<const double> x, const DensityConfig& cfg) {
  return TheoremDensities(cfg).f_mix(x);
}

double density_fbar(std::span<const double> x, const DensityConfig& cfg) {
  return TheoremDensities(cfg).f_bar(x);
}

TheoremReport verify_theorem(const DensityConfig& cfg) {
  const TheoremDensities dens(cfg);
  if (cfg.resolution < 2) throw UsageError("grid resolution must be at least 2");
  const std::size_t d = cfg.dim();
  const double step = 2.0 * cfg.extent / static_cast<double>(cfg.resolution - 1);
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= cfg.resolution;

  TheoremReport report;
  report.min_margin = std::numeric_limits<double>::infinity();
  std::vector<double> x(d);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rem = n;
    for (std::size_t i = 0; i < d; ++i) {
      idx[i] = rem % cfg.resolution;
      rem /= cfg.resolution;
      x[i] = -cfg.extent + step * static_cast<double>(idx[i]);
    }
    if (std::abs(dens.projection(x)) <= cfg.threshold + cfg.margin) continue;
    ++report.points_checked;
    const double gap = dens.relative_gap(x);
    if (gap < report.min_margin) {
      report.min_margin = gap;
      report.worst_point = x;
    }
  }
  if (report.points_checked == 0) throw UsageError("grid does not intersect the region |x'v| > 1.5");
  report.min_gap = dens.f_bar(report.worst_point) - dens.f(report.worst_point);
  report.holds = report.min_margin > 0.0;
  return report;
}

double empirical_boundary(const DensityConfig& cfg, double step, double limit) {
  const TheoremDensities dens(cfg);
  const auto& v = dens.direction();
  double v2 = 0.0;
  for (double c : v) v2 += c * c;
  std::vector<double> x(v.size());
  double boundary = 0.0;
  for (double t = 0.0; t <= limit; t += step) {
    // x = t·v/‖v‖² has projection exactly t.
    for (std::size_t i = 0; i < v.size(); ++i) x[i] = t * v[i] / v2;
    if (dens.relative_gap(x) <= 0.0) boundary = t + step;
  }
  return boundary;
}

double MixHistogram::id_mass(double lo, double hi) const {
  double m = 0.0;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const double c = 0.5 * (edges[b] + edges[b + 1]);
    if (c >= lo && c <= hi) m += id_density[b] * (edges[b + 1] - edges[b]);
  }
  return m;
}

double MixHistogram::mixed_mass(double lo, double hi) const {
  double m = 0.0;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const double c = 0.5 * (edges[b] + edges[b + 1]);
    if (c >= lo && c <= hi) m += mixed_density[b] * (edges[b + 1] - edges[b]);
  }
  return m;
}

namespace {

std::vector<double> to_density(const std::vector<std::size_t>& counts, std::size_t in_range,
                               double width) {
  std::vector<double> out(counts.size(), 0.0);
  if (in_range == 0) return out;
  for (std::size_t b = 0; b < counts.size(); ++b) {
    out[b] = static_cast<double>(counts[b]) / (static_cast<double>(in_range) * width);
  }
  return out;
}

}  // namespace

MixHistogram empirical_mix_density(std::span<const double> id_samples,
                                   std::span<const double> outlier_samples, double alpha,
                                   std::size_t n_mix, const HistogramSpec& bins, Rng& rng,
                                   std::optional<double> fixed_lambda) {
  if (id_samples.empty() || outlier_samples.empty()) {
    throw UsageError("mix density needs ID and outlier samples");
  }
  if (bins.bins == 0 || !(bins.hi > bins.lo)) throw ParameterError("invalid histogram range");
  if (!fixed_lambda && !(alpha > 0.0)) throw ParameterError("alpha must be positive");
  const double width = (bins.hi - bins.lo) / static_cast<double>(bins.bins);
  MixHistogram h;
  h.edges.resize(bins.bins + 1);
  for (std::size_t b = 0; b <= bins.bins; ++b) h.edges[b] = bins.lo + width * static_cast<double>(b);

  auto bin_of = [&](double v) -> std::optional<std::size_t> {
    if (v < bins.lo || v > bins.hi) return std::nullopt;
    auto b = static_cast<std::size_t>((v - bins.lo) / width);
    return std::min(b, bins.bins - 1);
  };

  std::vector<std::size_t> id_counts(bins.bins, 0);
  std::vector<std::size_t> mix_counts(bins.bins, 0);
  for (double v : id_samples) {
    if (auto b = bin_of(v)) ++id_counts[*b]; else ++h.id_out_of_range;
  }
  for (std::size_t i = 0; i < n_mix; ++i) {
    const double x = id_samples[rng.index(id_samples.size())];
    const double xt = outlier_samples[rng.index(outlier_samples.size())];
    const double lambda = fixed_lambda ? *fixed_lambda : rng.beta(alpha, alpha);
    const double mixed = lambda * x + (1.0 - lambda) * xt;
    if (auto b = bin_of(mixed)) ++mix_counts[*b]; else ++h.mixed_out_of_range;
  }
  h.id_density = to_density(id_counts, id_samples.size() - h.id_out_of_range, width);
  h.mixed_density = to_density(mix_counts, n_mix - h.mixed_out_of_range, width);
  return h;
}

}  // namespace openmix
