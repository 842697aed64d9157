#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "openmix/datasets.hpp"
#include "openmix/matrix.hpp"
#include "openmix/mlp.hpp"
#include "openmix/rng.hpp"

namespace openmix {

/// Probability vector used as a training target.
class SoftLabel {
 public:
  /// Throws InvariantError unless entries lie in [0, 1] and sum to 1 within 1e-12.
  explicit SoftLabel(std::vector<double> probs);

  static SoftLabel one_hot(std::size_t cls, std::size_t num_outputs);
  static SoftLabel uniform(std::size_t num_outputs);

  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const noexcept { return probs_[i]; }

 private:
  std::vector<double> probs_;
};

/// Outlier-mixing hyperparameters. λ ~ Beta(alpha, alpha); gamma weighs the
/// mixed (or raw outlier) term.
struct MixConfig {
  double alpha = 10.0;
  double gamma = 1.0;
  /// One λ per (ID, outlier) pair; false draws a single λ per batch.
  bool per_pair_lambda = true;
  /// Overrides sampling (λ = 1 or 0 endpoints, or a fixed interpolation).
  std::optional<double> fixed_lambda;

  void validate() const;
};

struct LossResult {
  double loss = 0.0;
  Matrix grad_logits;
};

/// Mean soft-label cross-entropy over rows; grad = (softmax − target) / n.
LossResult ce_loss(const Matrix& logits, const Matrix& targets);
LossResult ce_loss(const Matrix& logits, std::span<const SoftLabel> targets);

/// Mean KL(U ‖ softmax(logits)) over rows, U uniform over k classes.
LossResult oe_loss(const Matrix& logits_out, std::size_t k);

struct MixedSample {
  std::vector<double> input;
  SoftLabel label;
};

/// x̆ = λx + (1−λ)x̃ with label λ at y and 1−λ at the reject index k (length k+1).
MixedSample openmix_transform(std::span<const double> x, std::size_t y,
                              std::span<const double> x_tilde, std::size_t k, double lambda);

struct BatchLoss {
  double loss = 0.0;
  Gradients grads;
};

/// Plain cross-entropy with one-hot labels over the model's outputs. When the
/// model has k+1 outputs the reject class receives no mass.
BatchLoss ce_batch_loss(const MlpModel& model, const LabeledDataset& id_batch);

/// CE on ID + oe_weight · KL(U ‖ f(x̃)) on outliers. Model has k outputs.
BatchLoss oe_batch_loss(const MlpModel& model, const LabeledDataset& id_batch,
                        const Matrix& outlier_batch, double oe_weight);

/// CE on ID + gamma · CE on raw outliers labeled as the reject class. Model has k+1 outputs.
BatchLoss rc_batch_loss(const MlpModel& model, const LabeledDataset& id_batch,
                        const Matrix& outlier_batch, double gamma);

/// Outlier transformation without a reject class: the mixed label
/// interpolates one-hot y with the uniform distribution over k. Model has k outputs.
BatchLoss ot_batch_loss(const MlpModel& model, const LabeledDataset& id_batch,
                        const Matrix& outlier_batch, const MixConfig& cfg, Rng& rng);

/// In-distribution Mixup with one λ per batch and partners from a seeded permutation.
BatchLoss mixup_batch_loss(const MlpModel& model, const LabeledDataset& id_batch, double alpha,
                           Rng& rng, std::optional<double> fixed_lambda = std::nullopt);

/// CE on ID (one-hot over k+1) + gamma · CE on ID/outlier mixtures with
/// labels split between the true class and the reject class. ID sample i is
/// paired with outlier row i.
BatchLoss openmix_batch_loss(const MlpModel& model, const LabeledDataset& id_batch,
                             const Matrix& outlier_batch, const MixConfig& cfg, Rng& rng);

enum class Objective { msp, oe, rc, ot, mixup, openmix };

std::string_view to_string(Objective objective);
/// Throws ConfigError listing {msp, oe, rc, ot, mixup, openmix}.
Objective parse_objective(std::string_view name);
bool uses_outliers(Objective objective) noexcept;
bool uses_reject_class(Objective objective) noexcept;
/// k or k+1.
std::size_t output_dim(Objective objective, std::size_t k) noexcept;

struct ObjectiveParams {
  MixConfig mix;
  /// OE penalty weight.
  double oe_weight = 0.5;
  /// Beta shape for the in-distribution Mixup baseline.
  double mixup_alpha = 0.3;
};

BatchLoss objective_batch_loss(Objective objective, const MlpModel& model,
                               const LabeledDataset& id_batch, const Matrix* outlier_batch,
                               const ObjectiveParams& params, Rng& rng);

}  // namespace openmix
