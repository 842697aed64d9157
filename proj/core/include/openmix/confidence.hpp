#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "openmix/matrix.hpp"
#include "openmix/mlp.hpp"

namespace openmix {

/// One scored prediction. `predicted` is always one of the k original classes.
/// In OOD mode `correct` marks in-distribution samples.
struct EvalRecord {
  std::size_t predicted = 0;
  double confidence = 0.0;
  bool correct = false;
};

enum class Scorer { msp, neg_entropy, max_logit, energy };

std::string_view to_string(Scorer scorer);
Scorer parse_scorer(std::string_view name);

struct ScoreOptions {
  Scorer scorer = Scorer::msp;
  /// Rescale the first k softmax entries to sum to 1 before scoring. Off by
  /// default: a reject-class model reports the raw restricted maximum.
  bool renormalize = false;
};

/// Scores the first k model outputs. `labels`, when given, fill `correct`.
std::vector<EvalRecord> score(const MlpModel& model, const Matrix& batch, std::size_t k,
                              const ScoreOptions& options,
                              std::span<const std::size_t> labels = {});

/// Same, from precomputed logits.
std::vector<EvalRecord> score_logits(const Matrix& logits, std::size_t k,
                                     const ScoreOptions& options,
                                     std::span<const std::size_t> labels = {});

/// Thresholded decision: accept iff κ ≥ δ.
struct DecisionRule {
  double threshold = 0.5;
};

enum class Decision { accept, reject };

std::vector<Decision> decide(std::span<const EvalRecord> records, DecisionRule rule);

}  // namespace openmix
