#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "openmix/datasets.hpp"
#include "openmix/mlp.hpp"
#include "openmix/objectives.hpp"

namespace openmix {

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  /// Fractions of `epochs` at which the learning rate is multiplied by `lr_decay_factor`.
  std::vector<double> lr_decay_epochs = {0.5, 0.75};
  double lr_decay_factor = 0.1;
  Objective objective = Objective::msp;
  ObjectiveParams params;
  /// Hidden widths; the input and output dims come from the data and objective.
  std::vector<std::size_t> hidden = {32, 32};
  std::uint64_t seed = 1;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
};

/// Learning rate for every epoch: decay points are round(fraction · epochs).
std::vector<double> lr_schedule(const TrainConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double acc = 0.0;
  double auroc = 0.0;
  double aurc = 0.0;
  double fpr95 = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;

  /// Columns: epoch,loss,acc,auroc,aurc,fpr95 (acc/auroc/fpr95 in percent).
  std::string to_csv() const;
};

struct TrainResult {
  MlpModel model;
  TrainLog log;
};

/// Runs the mini-batch loop. Outlier objectives draw an equal-size outlier
/// mini-batch per ID mini-batch from their own shuffled stream over
/// `outliers`, reshuffling whenever the pool is exhausted.
TrainResult train(const TrainConfig& cfg, const LabeledDataset& id_train,
                  const OutlierSet* outliers, const LabeledDataset& id_test);

}  // namespace openmix
