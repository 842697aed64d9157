#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "openmix/confidence.hpp"
#include "openmix/datasets.hpp"

namespace openmix {

/// Misclassification-detection metrics, stored unscaled: AURC/E-AURC as raw
/// fractions, the rest as percentages. Undefined entries are NaN.
struct MetricReport {
  double aurc = 0.0;
  double e_aurc = 0.0;
  double auroc = 0.0;
  double aupr = 0.0;
  double fpr95 = 0.0;
  double acc = 0.0;
};

/// Area under the risk-coverage curve: records sorted by descending
/// confidence (ties keep input order), mean of the selective risk over
/// every coverage m = 1..n.
double aurc(std::span<const EvalRecord> records);

/// AURC minus the AURC of the same records re-ranked correct-first.
double e_aurc(std::span<const EvalRecord> records);

/// Mann-Whitney probability that a random positive outranks a random
/// negative, ties counted as ½. Positives are `correct` records.
double auroc(std::span<const EvalRecord> records);

/// False-positive rate at the largest threshold whose TPR is at least 95%.
double fpr_at_95tpr(std::span<const EvalRecord> records);

/// Step-interpolated average precision; tied confidences share one threshold.
double aupr(std::span<const EvalRecord> records);

double accuracy(std::span<const EvalRecord> records);

/// Every metric at once; metrics that are undefined for the records become NaN.
MetricReport metric_report(std::span<const EvalRecord> records);

enum class CurveKind { risk_coverage, accuracy_rejection, roc, pr };

std::string_view to_string(CurveKind kind);
/// Throws ConfigError listing the accepted kinds.
CurveKind parse_curve_kind(std::string_view name);

struct CurvePoints {
  CurveKind kind = CurveKind::risk_coverage;
  std::vector<std::pair<double, double>> points;
};

/// risk_coverage: (m/n, risk among top m) for m = 1..n.
/// accuracy_rejection: (1 − m/n, accuracy among top m) for m = n..1.
/// roc: (FPR, TPR) from (0, 0) over distinct thresholds.
/// pr: (recall, precision) over distinct thresholds.
CurvePoints curve(std::span<const EvalRecord> records, CurveKind kind);

/// Records for ID-vs-OOD detection: `correct` = sample is in-distribution.
std::vector<EvalRecord> ood_records(const MlpModel& model, const Matrix& id_test,
                                    const Matrix& ood_test, std::size_t k,
                                    const ScoreOptions& options);

}  // namespace openmix
