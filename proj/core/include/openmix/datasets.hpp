#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "openmix/matrix.hpp"
#include "openmix/rng.hpp"

namespace openmix {

/// Labeled in-distribution samples. Labels lie in [0, num_classes).
struct LabeledDataset {
  Matrix features;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }

  /// Throws InvariantError if labels and rows disagree, a label is out of
  /// range, or a feature is not finite.
  void validate() const;
  LabeledDataset subset(std::span<const std::size_t> indices) const;
  std::vector<std::size_t> class_counts() const;
};

/// Unlabeled auxiliary outliers.
struct OutlierSet {
  Matrix features;

  std::size_t size() const noexcept { return features.rows(); }
  std::size_t dim() const noexcept { return features.cols(); }
};

/// Isotropic Gaussian clusters, `n_per_class` samples around each row of `centers`.
LabeledDataset gen_gaussian_blobs(std::size_t k, std::size_t n_per_class, std::size_t d,
                                  const Matrix& centers, double sigma, Rng& rng);

/// Vertices of an equilateral triangle with the given side, centroid at the origin.
Matrix triangle_centers(double side);

enum class OutlierFamily { gaussian_noise, rademacher, annulus_blob, held_out_class };

std::string_view to_string(OutlierFamily family);
/// Throws ConfigError listing the accepted names.
OutlierFamily parse_outlier_family(std::string_view name);

struct OutlierParams {
  /// gaussian_noise mean / annulus center. Empty means the origin.
  std::vector<double> center;
  /// gaussian_noise standard deviation, rademacher magnitude.
  double scale = 1.0;
  double r_inner = 6.0;
  double r_outer = 9.0;
  /// held_out_class: cluster centers (rows) and their spread.
  Matrix extra_centers;
  double extra_sigma = 1.0;
  /// held_out_class: the in-distribution centers the extra centers must avoid.
  Matrix id_centers;
};

OutlierSet gen_outliers(OutlierFamily family, std::size_t m, std::size_t d,
                        const OutlierParams& params, Rng& rng);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified split: every class contributes round(n_c · test_fraction)
/// samples to the test side, clamped so both sides keep at least one.
SplitIndices split_indices(const LabeledDataset& ds, double test_fraction, Rng& rng);

struct TrainTestSplit {
  LabeledDataset train;
  LabeledDataset test;
};

TrainTestSplit split(const LabeledDataset& ds, double test_fraction, Rng& rng);

/// One epoch of shuffled index blocks; the final short block is kept.
std::vector<std::vector<std::size_t>> batches(std::size_t n, std::size_t batch_size, Rng& rng);

/// CSV with the label in the last column. k is inferred as max label + 1.
LabeledDataset load_csv(const std::filesystem::path& path);
OutlierSet load_csv_unlabeled(const std::filesystem::path& path);
LabeledDataset parse_labeled_csv(std::string_view text);
OutlierSet parse_unlabeled_csv(std::string_view text);

/// 17 significant digits, LF line endings, no header.
std::string to_csv(const LabeledDataset& ds);
std::string to_csv(const OutlierSet& outliers);
void save_csv(const LabeledDataset& ds, const std::filesystem::path& path);
void save_csv(const OutlierSet& outliers, const std::filesystem::path& path);

}  // namespace openmix
