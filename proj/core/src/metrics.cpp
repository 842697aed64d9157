#include "openmix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "openmix/error.hpp"

namespace openmix {

namespace {

void require_nonempty(std::span<const EvalRecord> records, const char* what) {
  if (records.empty()) throw UsageError(std::string(what) + " needs at least one record");
}

std::pair<std::size_t, std::size_t> count_classes(std::span<const EvalRecord> records) {
  std::size_t pos = 0;
  for (const auto& r : records) pos += r.correct ? 1 : 0;
  return {pos, records.size() - pos};
}

void require_both_classes(std::span<const EvalRecord> records, const char* what) {
  const auto [pos, neg] = count_classes(records);
  if (pos == 0 || neg == 0) {
    throw UndefinedMetricError(std::string(what) + " needs both positive and negative records");
  }
}

/// Indices by descending confidence; equal confidences keep input order.
std::vector<std::size_t> ranking(std::span<const EvalRecord> records) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].confidence > records[b].confidence;
  });
  return order;
}

/// Cumulative (tp, fp) after each group of tied confidences, descending.
struct ThresholdStep {
  double threshold;
  std::size_t tp;
  std::size_t fp;
};

std::vector<ThresholdStep> threshold_steps(std::span<const EvalRecord> records) {
  const auto order = ranking(records);
  std::vector<ThresholdStep> steps;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& r = records[order[i]];
    (r.correct ? tp : fp) += 1;
    const bool group_end =
        i + 1 == order.size() || records[order[i + 1]].confidence != r.confidence;
    if (group_end) steps.push_back({r.confidence, tp, fp});
  }
  return steps;
}

double aurc_of_order(std::span<const EvalRecord> records, std::span<const std::size_t> order) {
  double errors = 0.0;
  double sum = 0.0;
  for (std::size_t m = 0; m < order.size(); ++m) {
    errors += records[order[m]].correct ? 0.0 : 1.0;
    sum += errors / static_cast<double>(m + 1);
  }
  return sum / static_cast<double>(order.size());
}

template <typename F>
double or_nan(F&& f) {
  try {
    return f();
  } catch (const UndefinedMetricError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

double aurc(std::span<const EvalRecord> records) {
  require_nonempty(records, "aurc");
  return aurc_of_order(records, ranking(records));
}

double e_aurc(std::span<const EvalRecord> records) {
  require_nonempty(records, "e_aurc");
  std::vector<std::size_t> oracle(records.size());
  std::iota(oracle.begin(), oracle.end(), std::size_t{0});
  std::stable_partition(oracle.begin(), oracle.end(),
                        [&](std::size_t i) { return records[i].correct; });
  return aurc(records) - aurc_of_order(records, oracle);
}

double auroc(std::span<const EvalRecord> records) {
  require_both_classes(records, "auroc");
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].confidence < records[b].confidence;
  });
  // Sum of midranks (1-based) of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t pos_in_group = 0;
    while (j < order.size() && records[order[j]].confidence == records[order[i]].confidence) {
      pos_in_group += records[order[j]].correct ? 1 : 0;
      ++j;
    }
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += midrank * static_cast<double>(pos_in_group);
    i = j;
  }
  const auto [pos, neg] = count_classes(records);
  const double p = static_cast<double>(pos);
  const double n = static_cast<double>(neg);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double fpr_at_95tpr(std::span<const EvalRecord> records) {
  require_both_classes(records, "fpr_at_95tpr");
  const auto [pos, neg] = count_classes(records);
  for (const auto& step : threshold_steps(records)) {
    if (step.tp * 100 >= pos * 95) {
      return static_cast<double>(step.fp) / static_cast<double>(neg);
    }
  }
  return 1.0;  // unreachable: the last step accepts everything
}

double aupr(std::span<const EvalRecord> records) {
  require_nonempty(records, "aupr");
  const auto [pos, neg] = count_classes(records);
  if (pos == 0) throw UndefinedMetricError("aupr needs at least one positive record");
  double ap = 0.0;
  std::size_t prev_tp = 0;
  for (const auto& step : threshold_steps(records)) {
    const double precision =
        static_cast<double>(step.tp) / static_cast<double>(step.tp + step.fp);
    ap += static_cast<double>(step.tp - prev_tp) / static_cast<double>(pos) * precision;
    prev_tp = step.tp;
  }
  return ap;
}

double accuracy(std::span<const EvalRecord> records) {
  require_nonempty(records, "accuracy");
  return static_cast<double>(count_classes(records).first) / static_cast<double>(records.size());
}

MetricReport metric_report(std::span<const EvalRecord> records) {
  MetricReport r;
  r.aurc = aurc(records);
  r.e_aurc = e_aurc(records);
  r.auroc = or_nan([&] { return 100.0 * auroc(records); });
  r.aupr = or_nan([&] { return 100.0 * aupr(records); });
  r.fpr95 = or_nan([&] { return 100.0 * fpr_at_95tpr(records); });
  r.acc = 100.0 * accuracy(records);
  return r;
}

std::string_view to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::risk_coverage: return "risk_coverage";
    case CurveKind::accuracy_rejection: return "accuracy_rejection";
    case CurveKind::roc: return "roc";
    case CurveKind::pr: return "pr";
  }
  return "?";
}

CurveKind parse_curve_kind(std::string_view name) {
  for (auto k : {CurveKind::risk_coverage, CurveKind::accuracy_rejection, CurveKind::roc,
                 CurveKind::pr}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown curve kind '" + std::string(name) +
                    "'; expected one of {risk_coverage, accuracy_rejection, roc, pr}");
}

CurvePoints curve(std::span<const EvalRecord> records, CurveKind kind) {
  require_nonempty(records, "curve");
  CurvePoints out{kind, {}};
  const double n = static_cast<double>(records.size());
  switch (kind) {
    case CurveKind::risk_coverage:
    case CurveKind::accuracy_rejection: {
      const auto order = ranking(records);
      std::vector<double> errors_at(order.size());
      double errors = 0.0;
      for (std::size_t m = 0; m < order.size(); ++m) {
        errors += records[order[m]].correct ? 0.0 : 1.0;
        errors_at[m] = errors;
      }
      if (kind == CurveKind::risk_coverage) {
        for (std::size_t m = 1; m <= order.size(); ++m) {
          out.points.emplace_back(static_cast<double>(m) / n,
                                  errors_at[m - 1] / static_cast<double>(m));
        }
      } else {
        for (std::size_t m = order.size(); m >= 1; --m) {
          const double md = static_cast<double>(m);
          out.points.emplace_back(1.0 - md / n, (md - errors_at[m - 1]) / md);
        }
      }
      break;
    }
    case CurveKind::roc: {
      require_both_classes(records, "roc curve");
      const auto [pos, neg] = count_classes(records);
      out.points.emplace_back(0.0, 0.0);
      for (const auto& s : threshold_steps(records)) {
        out.points.emplace_back(static_cast<double>(s.fp) / static_cast<double>(neg),
                                static_cast<double>(s.tp) / static_cast<double>(pos));
      }
      break;
    }
    case CurveKind::pr: {
      const auto [pos, neg] = count_classes(records);
      if (pos == 0) throw UndefinedMetricError("pr curve needs at least one positive record");
      for (const auto& s : threshold_steps(records)) {
        out.points.emplace_back(static_cast<double>(s.tp) / static_cast<double>(pos),
                                static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp));
      }
      break;
    }
  }
  return out;
}

std::vector<EvalRecord> ood_records(const MlpModel& model, const Matrix& id_test,
                                    const Matrix& ood_test, std::size_t k,
                                    const ScoreOptions& options) {
  if (id_test.rows() == 0 || ood_test.rows() == 0) {
    throw UsageError("OOD evaluation needs nonempty ID and OOD sets");
  }
  auto id = score(model, id_test, k, options);
  auto ood = score(model, ood_test, k, options);
  for (auto& r : id) r.correct = true;
  for (auto& r : ood) r.correct = false;
  id.insert(id.end(), ood.begin(), ood.end());
  return id;
}

}  // namespace openmix
