#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "openmix/datasets.hpp"
#include "openmix/matrix.hpp"
#include "openmix/mlp.hpp"
#include "openmix/rng.hpp"

namespace openmix {

/// Feature-space uniformity: mean intra-class pairwise distance over mean
/// distance between class means (Euclidean).
struct FsuReport {
  double pi_intra = 0.0;
  double pi_inter = 0.0;
  double pi_fsu = 0.0;
  Matrix class_means;
  /// Number of intra-class pairs averaged over.
  std::size_t z_intra = 0;
  /// Number of ordered class-mean pairs, k(k−1).
  std::size_t z_inter = 0;

  /// JSON object text.
  std::string to_json() const;
};

/// FSU of a feature matrix. Classes with at most `max_pairs_per_class`
/// unordered pairs are evaluated exhaustively; larger classes contribute
/// `max_pairs_per_class` uniformly drawn pairs (i ≠ j).
FsuReport fsu_from_features(const Matrix& features, std::span<const std::size_t> labels,
                            std::size_t k, std::size_t max_pairs_per_class, Rng& rng);

/// FSU of the model's penultimate features on `dataset`.
FsuReport fsu(const MlpModel& model, const LabeledDataset& dataset,
              std::size_t max_pairs_per_class, Rng& rng);

}  // namespace openmix
