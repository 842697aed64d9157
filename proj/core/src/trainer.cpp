#include "openmix/trainer.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "openmix/confidence.hpp"
#include "openmix/error.hpp"
#include "openmix/io.hpp"
#include "openmix/metrics.hpp"

namespace openmix {

namespace {

enum Stream : std::uint64_t { kInit = 1, kOutliers = 2, kMixing = 3, kEpochBase = 1000 };

class OutlierSampler {
 public:
  OutlierSampler(const OutlierSet& pool, Rng rng) : pool_(pool), rng_(rng) { reshuffle(); }

  Matrix next(std::size_t n) {
    std::vector<std::size_t> idx;
    idx.reserve(n);
    while (idx.size() < n) {
      if (cursor_ == order_.size()) reshuffle();
      idx.push_back(order_[cursor_++]);
    }
    return pool_.features.gather_rows(idx);
  }

 private:
  void reshuffle() {
    order_ = rng_.permutation(pool_.size());
    cursor_ = 0;
  }

  const OutlierSet& pool_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be at least 1");
  if (!(lr > 0.0)) throw ConfigError("train.lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train.momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("train.weight_decay must be nonnegative");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor < 1.0)) {
    throw ConfigError("train.lr_decay_factor must lie in (0, 1)");
  }
  for (double f : lr_decay_epochs) {
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("train.lr_decay_epochs entries must lie in (0, 1)");
  }
  for (std::size_t h : hidden) {
    if (h == 0) throw ConfigError("model.hidden widths must be positive");
  }
  params.mix.validate();
  if (!(params.oe_weight >= 0.0)) throw ConfigError("oe.weight must be nonnegative");
  if (!(params.mixup_alpha > 0.0)) throw ConfigError("mixup.alpha must be positive");
}

std::vector<double> lr_schedule(const TrainConfig& cfg) {
  std::vector<double> out(cfg.epochs);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    double lr = cfg.lr;
    for (double f : cfg.lr_decay_epochs) {
      const auto at = static_cast<std::size_t>(std::llround(f * static_cast<double>(cfg.epochs)));
      if (e >= at) lr *= cfg.lr_decay_factor;
    }
    out[e] = lr;
  }
  return out;
}

std::string TrainLog::to_csv() const {
  std::string s = "epoch,loss,acc,auroc,aurc,fpr95\n";
  for (const auto& r : epochs) {
    s += std::to_string(r.epoch) + ',' + format_double(r.loss) + ',' + format_double(r.acc) + ',' +
         format_double(r.auroc) + ',' + format_double(r.aurc) + ',' + format_double(r.fpr95) + '\n';
  }
  return s;
}

TrainResult train(const TrainConfig& cfg, const LabeledDataset& id_train,
                  const OutlierSet* outliers, const LabeledDataset& id_test) {
  cfg.validate();
  id_train.validate();
  id_test.validate();
  if (id_train.size() == 0) throw UsageError("training set is empty");
  if (uses_outliers(cfg.objective)) {
    if (outliers == nullptr || outliers->size() == 0) {
      throw ConfigError("objective '" + std::string(to_string(cfg.objective)) +
                        "' requires an outlier set");
    }
    if (outliers->dim() != id_train.dim()) {
      throw DimensionError("outlier dimension does not match the training data");
    }
  }
  if (id_test.dim() != id_train.dim()) throw DimensionError("test dimension does not match training");

  const std::size_t k = id_train.num_classes;
  std::vector<std::size_t> dims{id_train.dim()};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(output_dim(cfg.objective, k));

  const Rng root(cfg.seed);
  Rng init_rng = root.fork(kInit);
  Rng mix_rng = root.fork(kMixing);
  TrainResult result{MlpModel::glorot(dims, init_rng), {}};
  OptimizerState opt =
      OptimizerState::for_model(result.model, cfg.lr, cfg.momentum, cfg.weight_decay);

  std::optional<OutlierSampler> sampler;
  if (uses_outliers(cfg.objective)) sampler.emplace(*outliers, root.fork(kOutliers));

  const auto schedule = lr_schedule(cfg);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    opt.learning_rate = schedule[epoch];
    Rng order_rng = root.fork(kEpochBase + epoch);
    double loss_sum = 0.0;
    const auto blocks = batches(id_train.size(), cfg.batch_size, order_rng);
    for (const auto& block : blocks) {
      const LabeledDataset id_batch = id_train.subset(block);
      Matrix out_batch;
      if (sampler) out_batch = sampler->next(block.size());
      BatchLoss step = objective_batch_loss(cfg.objective, result.model, id_batch,
                                            sampler ? &out_batch : nullptr, cfg.params, mix_rng);
      loss_sum += step.loss;
      sgd_step(result.model, step.grads, opt);
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.loss = loss_sum / static_cast<double>(blocks.size());
    if (id_test.size() > 0) {
      const auto records = score(result.model, id_test.features, k, {}, id_test.labels);
      const MetricReport m = metric_report(records);
      rec.acc = m.acc;
      rec.auroc = m.auroc;
      rec.aurc = m.aurc;
      rec.fpr95 = m.fpr95;
    }
    result.log.epochs.push_back(rec);
  }
  return result;
}

}  // namespace openmix
