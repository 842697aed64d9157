#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "openmix/config.hpp"
#include "openmix/density.hpp"
#include "openmix/fsu.hpp"
#include "openmix/metrics.hpp"
#include "openmix/trainer.hpp"

namespace openmix {

struct ExperimentData {
  LabeledDataset train;
  LabeledDataset test;
  std::optional<OutlierSet> outliers;
  std::optional<OutlierSet> ood;
};

/// Materializes the configured datasets. Generated data depends only on the
/// data/outlier/ood seeds, never on the training seed.
ExperimentData build_data(const ExperimentConfig& cfg);

/// Returns std::nullopt for family "none".
std::optional<OutlierSet> build_outliers(const OutlierSpec& spec, std::size_t d,
                                         const Matrix& id_centers);

struct RunSummary {
  std::uint64_t seed = 0;
  Objective method = Objective::msp;
  Scorer scorer = Scorer::msp;
  MetricReport report;
  double fsu = 0.0;
};

/// Misclassification metrics on `data.test` plus FSU of the penultimate features.
RunSummary evaluate_model(const MlpModel& model, const ExperimentData& data,
                          const ExperimentConfig& cfg, Objective method, std::uint64_t seed);

/// Header: seed,method,scorer,aurc,e_aurc,auroc,aupr,fpr95,acc,fsu
std::string summary_csv(const std::vector<RunSummary>& runs);

struct AggregateRow {
  Objective method = Objective::msp;
  Scorer scorer = Scorer::msp;
  std::size_t n_seeds = 0;
  MetricReport mean;
  MetricReport std;
  double fsu_mean = 0.0;
  double fsu_std = 0.0;
};

/// Mean and population standard deviation per method, in first-appearance order.
std::vector<AggregateRow> aggregate(const std::vector<RunSummary>& runs);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);

/// Trains `cfg.train` and writes model.omck, log.csv and manifest.txt into `out_dir`.
TrainResult run_train(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct CompareResult {
  std::vector<RunSummary> runs;
  std::vector<AggregateRow> aggregates;
};

std::filesystem::path run_checkpoint_path(const std::filesystem::path& out_dir, Objective method,
                                          std::uint64_t seed);

/// Trains every method × seed. Writes manifest.txt, summary.csv,
/// aggregate.csv and one checkpoint per run under checkpoints/.
CompareResult run_compare(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// "x,y" header then one point per line.
std::string curve_csv(const CurvePoints& curve);
/// Minimal standalone SVG line plot.
std::string curve_svg(const CurvePoints& curve);

/// Writes <kind>.csv (and <kind>.svg when `svg`) for each requested kind.
std::vector<CurvePoints> run_curves(const MlpModel& model, const LabeledDataset& test,
                                    const ScoreOptions& options,
                                    const std::vector<CurveKind>& kinds,
                                    const std::filesystem::path& out_dir, bool svg);

struct TheoremRun {
  TheoremReport report;
  double boundary = 0.0;
  MixHistogram histogram;
};

DensityConfig density_config(const TheoremSpec& spec);
/// Writes theorem.csv and histogram.csv.
TheoremRun run_theorem(const TheoremSpec& spec, const std::filesystem::path& out_dir);

}  // namespace openmix
