#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "openmix/confidence.hpp"
#include "openmix/datasets.hpp"
#include "openmix/trainer.hpp"

namespace openmix {

/// In-distribution data: generated 2-D Gaussian blobs (k = 3 at the vertices
/// of an equilateral triangle) or CSV files.
struct DataSpec {
  std::string source = "blobs";
  std::size_t n_per_class = 500;
  double side = 4.0;
  double sigma = 1.2;
  double test_fraction = 0.5;
  std::uint64_t seed = 7;
  std::string train_csv;
  std::string test_csv;
};

/// Auxiliary training outliers or OOD test samples.
struct OutlierSpec {
  /// Outlier family name, "csv", or "none".
  std::string family = "annulus_blob";
  std::size_t m = 2000;
  double scale = 1.0;
  double r_inner = 3.0;
  double r_outer = 4.5;
  double extra_sigma = 1.0;
  double extra_radius_factor = 2.5;
  std::uint64_t seed = 11;
  std::string csv;
};

struct EvalSpec {
  Scorer scorer = Scorer::msp;
  bool renormalize = false;
  std::size_t fsu_max_pairs = 20000;
  std::uint64_t fsu_seed = 5;
};

struct TheoremSpec {
  std::size_t d = 1;
  /// Row-major d×d covariance.
  std::vector<double> sigma = {1.0};
  std::vector<double> mu_bar = {1.0};
  double extent = 6.0;
  std::size_t resolution = 1201;
  double margin = 0.0;
  /// Empirical mixing histogram: ID = N(0, 1), outliers = N(outlier_mean, 1).
  double alpha = 10.0;
  double outlier_mean = 4.0;
  std::size_t n_samples = 100000;
  std::size_t n_mix = 100000;
  double hist_lo = -4.0;
  double hist_hi = 8.0;
  std::size_t hist_bins = 120;
  std::uint64_t seed = 3;
};

struct ExperimentConfig {
  DataSpec data;
  OutlierSpec outliers;
  OutlierSpec ood = {"annulus_blob", 1500, 1.0, 10.0, 14.0, 1.0, 2.5, 13, {}};
  TrainConfig train;
  EvalSpec eval;
  TheoremSpec theorem;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<Objective> methods = {Objective::msp, Objective::oe, Objective::openmix};
  std::string out = "out";

  /// Throws ConfigError on out-of-range values or missing referenced files.
  void validate() const;
};

/// Every accepted key, in manifest order.
std::vector<std::string> config_keys();

/// Applies one `key = value` assignment. Unknown keys raise ConfigError
/// naming the key and listing the accepted ones.
void apply_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Parses flat `section.key = value` text; `#` starts a comment.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text with every key, used as the run manifest. parse_config
/// of the result reproduces `cfg` exactly.
std::string emit_config(const ExperimentConfig& cfg);

}  // namespace openmix
