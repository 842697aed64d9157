#include "openmix/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "openmix/error.hpp"

namespace openmix {

namespace {

constexpr double kLabelTolerance = 1e-12;

void check_distribution(std::span<const double> p, const char* what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvariantError(std::string(what) + ": entry outside [0, 1]");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kLabelTolerance) {
    throw InvariantError(std::string(what) + ": entries sum to " + std::to_string(sum));
  }
}

/// Row-wise log-softmax; finite for any finite logits.
Matrix log_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto in = logits.row(i);
    auto o = out.row(i);
    const double mx = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (double v : in) sum += std::exp(v - mx);
    const double lse = mx + std::log(sum);
    for (std::size_t j = 0; j < in.size(); ++j) o[j] = in[j] - lse;
  }
  return out;
}

double draw_lambda(const MixConfig& cfg, Rng& rng) {
  if (cfg.fixed_lambda) return *cfg.fixed_lambda;
  return rng.beta(cfg.alpha, cfg.alpha);
}

Matrix one_hot_targets(const LabeledDataset& batch, std::size_t num_outputs) {
  Matrix t(batch.size(), num_outputs);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch.labels[i] >= num_outputs) throw InvariantError("label exceeds model outputs");
    t(i, batch.labels[i]) = 1.0;
  }
  return t;
}

void check_input_dim(const MlpModel& model, const Matrix& inputs, const char* what) {
  if (inputs.cols() != model.input_dim()) {
    throw DimensionError(std::string(what) + ": feature dimension " + std::to_string(inputs.cols()) +
                         " does not match model input " + std::to_string(model.input_dim()));
  }
}

/// first-term loss + weight · second-term loss through one stacked forward/backward.
template <typename SecondLoss>
BatchLoss two_term_loss(const MlpModel& model, const Matrix& first_inputs,
                        const Matrix& first_targets, const Matrix& second_inputs, double weight,
                        SecondLoss&& second_loss) {
  check_input_dim(model, first_inputs, "ID batch");
  check_input_dim(model, second_inputs, "auxiliary batch");
  const std::size_t n1 = first_inputs.rows();
  const auto trace = forward_trace(model, vstack(first_inputs, second_inputs));
  Matrix logits1(n1, trace.logits.cols());
  Matrix logits2(second_inputs.rows(), trace.logits.cols());
  for (std::size_t i = 0; i < trace.logits.rows(); ++i) {
    auto src = trace.logits.row(i);
    auto dst = i < n1 ? logits1.row(i) : logits2.row(i - n1);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  LossResult a = ce_loss(logits1, first_targets);
  LossResult b = second_loss(logits2);
  Matrix grad(trace.logits.rows(), trace.logits.cols());
  for (std::size_t i = 0; i < grad.rows(); ++i) {
    auto dst = grad.row(i);
    if (i < n1) {
      auto src = a.grad_logits.row(i);
      std::copy(src.begin(), src.end(), dst.begin());
    } else {
      auto src = b.grad_logits.row(i - n1);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = weight * src[j];
    }
  }
  return {a.loss + weight * b.loss, backward(model, trace, grad)};
}

}  // namespace

SoftLabel::SoftLabel(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvariantError("soft label must be nonempty");
  check_distribution(probs_, "soft label");
}

SoftLabel SoftLabel::one_hot(std::size_t cls, std::size_t num_outputs) {
  if (cls >= num_outputs) throw InvariantError("one-hot class out of range");
  std::vector<double> p(num_outputs, 0.0);
  p[cls] = 1.0;
  return SoftLabel(std::move(p));
}

SoftLabel SoftLabel::uniform(std::size_t num_outputs) {
  return SoftLabel(std::vector<double>(num_outputs, 1.0 / static_cast<double>(num_outputs)));
}

void MixConfig::validate() const {
  if (!(alpha > 0.0)) throw ParameterError("mix alpha must be positive");
  if (!(gamma >= 0.0)) throw ParameterError("mix gamma must be nonnegative");
  if (fixed_lambda && !(*fixed_lambda >= 0.0 && *fixed_lambda <= 1.0)) {
    throw ParameterError("fixed lambda must lie in [0, 1]");
  }
}

LossResult ce_loss(const Matrix& logits, const Matrix& targets) {
  if (targets.rows() != logits.rows() || targets.cols() != logits.cols()) {
    throw DimensionError("ce_loss: targets shape does not match logits");
  }
  const std::size_t n = logits.rows();
  LossResult out{0.0, Matrix(n, logits.cols())};
  if (n == 0) return out;
  const Matrix logp = log_softmax(logits);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto t = targets.row(i);
    check_distribution(t, "ce_loss target");
    auto lp = logp.row(i);
    auto g = out.grad_logits.row(i);
    double row_loss = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (t[j] > 0.0) row_loss -= t[j] * lp[j];
      g[j] = (std::exp(lp[j]) - t[j]) * inv_n;
    }
    out.loss += row_loss;
  }
  out.loss *= inv_n;
  return out;
}

LossResult ce_loss(const Matrix& logits, std::span<const SoftLabel> targets) {
  if (targets.size() != logits.rows()) throw DimensionError("ce_loss: one target per row required");
  Matrix t(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].size() != logits.cols()) {
      throw DimensionError("ce_loss: target length does not match logit columns");
    }
    std::copy(targets[i].probs().begin(), targets[i].probs().end(), t.row(i).begin());
  }
  return ce_loss(logits, t);
}

LossResult oe_loss(const Matrix& logits_out, std::size_t k) {
  if (logits_out.cols() != k) {
    throw DimensionError("oe_loss: logits have " + std::to_string(logits_out.cols()) +
                         " columns, expected k = " + std::to_string(k));
  }
  const std::size_t n = logits_out.rows();
  LossResult out{0.0, Matrix(n, k)};
  if (n == 0) return out;
  const Matrix logp = log_softmax(logits_out);
  const double inv_k = 1.0 / static_cast<double>(k);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double log_u = std::log(inv_k);
  for (std::size_t i = 0; i < n; ++i) {
    auto lp = logp.row(i);
    auto g = out.grad_logits.row(i);
    double kl = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      kl += inv_k * (log_u - lp[j]);
      g[j] = (std::exp(lp[j]) - inv_k) * inv_n;
    }
    out.loss += kl;
  }
  out.loss *= inv_n;
  return out;
}

MixedSample openmix_transform(std::span<const double> x, std::size_t y,
                              std::span<const double> x_tilde, std::size_t k, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in [0, 1]");
  if (y >= k) throw ParameterError("class index must be below k");
  if (x.size() != x_tilde.size()) throw DimensionError("ID and outlier rows differ in dimension");
  std::vector<double> input(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) input[j] = lambda * x[j] + (1.0 - lambda) * x_tilde[j];
  std::vector<double> label(k + 1, 0.0);
  label[y] = lambda;
  label[k] = 1.0 - lambda;
  return {std::move(input), SoftLabel(std::move(label))};
}

BatchLoss ce_batch_loss(const MlpModel& model, const LabeledDataset& id_batch) {
  check_input_dim(model, id_batch.features, "ID batch");
  const auto trace = forward_trace(model, id_batch.features);
  LossResult r = ce_loss(trace.logits, one_hot_targets(id_batch, model.output_dim()));
  return {r.loss, backward(model, trace, r.grad_logits)};
}

BatchLoss oe_batch_loss(const MlpModel& model, const LabeledDataset& id_batch,
                        const Matrix& outlier_batch, double oe_weight) {
  const std::size_t k = model.output_dim();
  return two_term_loss(model, id_batch.features, one_hot_targets(id_batch, k), outlier_batch,
                       oe_weight, [k](const Matrix& logits) { return oe_loss(logits, k); });
}

BatchLoss rc_batch_loss(const MlpModel& model, const LabeledDataset& id_batch,
                        const Matrix& outlier_batch, double gamma) {
  const std::size_t outputs = model.output_dim();
  if (outputs != id_batch.num_classes + 1) {
    throw DimensionError("reject-class objective needs k+1 model outputs");
  }
  Matrix reject(outlier_batch.rows(), outputs);
  for (std::size_t i = 0; i < reject.rows(); ++i) reject(i, outputs - 1) = 1.0;
  return two_term_loss(model, id_batch.features, one_hot_targets(id_batch, outputs), outlier_batch,
                       gamma, [&reject](const Matrix& logits) { return ce_loss(logits, reject); });
}

namespace {

void check_paired(const LabeledDataset& id_batch, const Matrix& outlier_batch) {
  if (outlier_batch.rows() != id_batch.size()) {
    throw DimensionError("outlier batch must pair one-to-one with the ID batch");
  }
  if (outlier_batch.cols() != id_batch.dim()) {
    throw DimensionError("outlier batch feature dimension does not match the ID batch");
  }
}

}  // namespace

BatchLoss ot_batch_loss(const MlpModel& model, const LabeledDataset& id_batch,
                        const Matrix& outlier_batch, const MixConfig& cfg, Rng& rng) {
  cfg.validate();
  check_paired(id_batch, outlier_batch);
  const std::size_t k = model.output_dim();
  if (k != id_batch.num_classes) throw DimensionError("outlier transformation needs k model outputs");
  const std::size_t n = id_batch.size();
  const double inv_k = 1.0 / static_cast<double>(k);
  Matrix mixed(n, id_batch.dim());
  Matrix targets(n, k);
  const double batch_lambda = cfg.per_pair_lambda ? 0.0 : draw_lambda(cfg, rng);
  for (std::size_t i = 0; i < n; ++i) {
    const double lambda = cfg.per_pair_lambda ? draw_lambda(cfg, rng) : batch_lambda;
    auto x = id_batch.features.row(i);
    auto xt = outlier_batch.row(i);
    auto xm = mixed.row(i);
    for (std::size_t j = 0; j < xm.size(); ++j) xm[j] = lambda * x[j] + (1.0 - lambda) * xt[j];
    auto t = targets.row(i);
    for (std::size_t c = 0; c < k; ++c) t[c] = (1.0 - lambda) * inv_k;
    t[id_batch.labels[i]] += lambda;
  }
  return two_term_loss(model, id_batch.features, one_hot_targets(id_batch, k), mixed, cfg.gamma,
                       [&targets](const Matrix& logits) { return ce_loss(logits, targets); });
}

BatchLoss mixup_batch_loss(const MlpModel& model, const LabeledDataset& id_batch, double alpha,
                           Rng& rng, std::optional<double> fixed_lambda) {
  if (!(alpha > 0.0)) throw ParameterError("mixup alpha must be positive");
  check_input_dim(model, id_batch.features, "ID batch");
  const std::size_t k = model.output_dim();
  const std::size_t n = id_batch.size();
  const auto partner = rng.permutation(n);
  const double lambda = fixed_lambda ? *fixed_lambda : rng.beta(alpha, alpha);
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in [0, 1]");
  Matrix mixed(n, id_batch.dim());
  Matrix targets(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t p = partner[i];
    auto xi = id_batch.features.row(i);
    auto xp = id_batch.features.row(p);
    auto xm = mixed.row(i);
    for (std::size_t j = 0; j < xm.size(); ++j) xm[j] = lambda * xi[j] + (1.0 - lambda) * xp[j];
    targets(i, id_batch.labels[i]) += lambda;
    targets(i, id_batch.labels[p]) += 1.0 - lambda;
  }
  const auto trace = forward_trace(model, mixed);
  LossResult r = ce_loss(trace.logits, targets);
  return {r.loss, backward(model, trace, r.grad_logits)};
}

BatchLoss openmix_batch_loss(const MlpModel& model, const LabeledDataset& id_batch,
                             const Matrix& outlier_batch, const MixConfig& cfg, Rng& rng) {
  cfg.validate();
  check_paired(id_batch, outlier_batch);
  const std::size_t k = id_batch.num_classes;
  if (model.output_dim() != k + 1) throw DimensionError("OpenMix needs k+1 model outputs");
  const std::size_t n = id_batch.size();
  Matrix mixed(n, id_batch.dim());
  Matrix targets(n, k + 1);
  const double batch_lambda = cfg.per_pair_lambda ? 0.0 : draw_lambda(cfg, rng);
  for (std::size_t i = 0; i < n; ++i) {
    const double lambda = cfg.per_pair_lambda ? draw_lambda(cfg, rng) : batch_lambda;
    auto sample = openmix_transform(id_batch.features.row(i), id_batch.labels[i],
                                    outlier_batch.row(i), k, lambda);
    std::copy(sample.input.begin(), sample.input.end(), mixed.row(i).begin());
    std::copy(sample.label.probs().begin(), sample.label.probs().end(), targets.row(i).begin());
  }
  return two_term_loss(model, id_batch.features, one_hot_targets(id_batch, k + 1), mixed, cfg.gamma,
                       [&targets](const Matrix& logits) { return ce_loss(logits, targets); });
}

std::string_view to_string(Objective objective) {
  switch (objective) {
    case Objective::msp: return "msp";
    case Objective::oe: return "oe";
    case Objective::rc: return "rc";
    case Objective::ot: return "ot";
    case Objective::mixup: return "mixup";
    case Objective::openmix: return "openmix";
  }
  return "?";
}

Objective parse_objective(std::string_view name) {
  for (auto o : {Objective::msp, Objective::oe, Objective::rc, Objective::ot, Objective::mixup,
                 Objective::openmix}) {
    if (to_string(o) == name) return o;
  }
  throw ConfigError("unknown objective '" + std::string(name) +
                    "'; expected one of {msp, oe, rc, ot, mixup, openmix}");
}

bool uses_outliers(Objective objective) noexcept {
  return objective == Objective::oe || objective == Objective::rc || objective == Objective::ot ||
         objective == Objective::openmix;
}

bool uses_reject_class(Objective objective) noexcept {
  return objective == Objective::rc || objective == Objective::openmix;
}

std::size_t output_dim(Objective objective, std::size_t k) noexcept {
  return uses_reject_class(objective) ? k + 1 : k;
}

BatchLoss objective_batch_loss(Objective objective, const MlpModel& model,
                               const LabeledDataset& id_batch, const Matrix* outlier_batch,
                               const ObjectiveParams& params, Rng& rng) {
  if (uses_outliers(objective) && outlier_batch == nullptr) {
    throw ConfigError("objective '" + std::string(to_string(objective)) + "' requires outliers");
  }
  switch (objective) {
    case Objective::msp: return ce_batch_loss(model, id_batch);
    case Objective::oe: return oe_batch_loss(model, id_batch, *outlier_batch, params.oe_weight);
    case Objective::rc: return rc_batch_loss(model, id_batch, *outlier_batch, params.mix.gamma);
    case Objective::ot: return ot_batch_loss(model, id_batch, *outlier_batch, params.mix, rng);
    case Objective::mixup: return mixup_batch_loss(model, id_batch, params.mixup_alpha, rng);
    case Objective::openmix:
      return openmix_batch_loss(model, id_batch, *outlier_batch, params.mix, rng);
  }
  throw ConfigError("unhandled objective");
}

}  // namespace openmix
