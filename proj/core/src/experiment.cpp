#include "openmix/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "openmix/checkpoint.hpp"
#include "openmix/error.hpp"
#include "openmix/io.hpp"

namespace openmix {

namespace {

Matrix class_means(const LabeledDataset& ds) {
  Matrix means(ds.num_classes, ds.dim());
  const auto counts = ds.class_counts();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto m = means.row(ds.labels[i]);
    auto x = ds.features.row(i);
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += x[j];
  }
  for (std::size_t c = 0; c < ds.num_classes; ++c) {
    for (double& v : means.row(c)) v /= static_cast<double>(std::max<std::size_t>(counts[c], 1));
  }
  return means;
}

std::string report_cells(const MetricReport& r) {
  return format_double(r.aurc) + ',' + format_double(r.e_aurc) + ',' + format_double(r.auroc) +
         ',' + format_double(r.aupr) + ',' + format_double(r.fpr95) + ',' + format_double(r.acc);
}

}  // namespace

std::optional<OutlierSet> build_outliers(const OutlierSpec& spec, std::size_t d,
                                         const Matrix& id_centers) {
  if (spec.family == "none") return std::nullopt;
  if (spec.family == "csv") {
    auto set = load_csv_unlabeled(spec.csv);
    if (set.dim() != d) throw DimensionError("outlier CSV dimension does not match the ID data");
    return set;
  }
  const auto family = parse_outlier_family(spec.family);
  OutlierParams params;
  params.scale = spec.scale;
  params.r_inner = spec.r_inner;
  params.r_outer = spec.r_outer;
  params.extra_sigma = spec.extra_sigma;
  params.id_centers = id_centers;
  // Held-out clusters sit opposite each ID center, pushed outward.
  params.extra_centers = Matrix(id_centers.rows(), id_centers.cols());
  for (std::size_t i = 0; i < id_centers.size(); ++i) {
    params.extra_centers.data()[i] = -spec.extra_radius_factor * id_centers.data()[i];
  }
  Rng rng(spec.seed);
  return gen_outliers(family, spec.m, d, params, rng);
}

ExperimentData build_data(const ExperimentConfig& cfg) {
  ExperimentData data;
  Matrix centers;
  if (cfg.data.source == "csv") {
    data.train = load_csv(cfg.data.train_csv);
    data.test = load_csv(cfg.data.test_csv);
    if (data.train.dim() != data.test.dim()) {
      throw DimensionError("train and test CSVs differ in feature dimension");
    }
    const std::size_t k = std::max(data.train.num_classes, data.test.num_classes);
    data.train.num_classes = k;
    data.test.num_classes = k;
    centers = class_means(data.train);
  } else {
    centers = triangle_centers(cfg.data.side);
    Rng rng(cfg.data.seed);
    Rng gen_rng = rng.fork(1);
    Rng split_rng = rng.fork(2);
    const auto full = gen_gaussian_blobs(centers.rows(), cfg.data.n_per_class, centers.cols(),
                                         centers, cfg.data.sigma, gen_rng);
    auto parts = split(full, cfg.data.test_fraction, split_rng);
    data.train = std::move(parts.train);
    data.test = std::move(parts.test);
  }
  data.outliers = build_outliers(cfg.outliers, data.train.dim(), centers);
  data.ood = build_outliers(cfg.ood, data.train.dim(), centers);
  return data;
}

RunSummary evaluate_model(const MlpModel& model, const ExperimentData& data,
                          const ExperimentConfig& cfg, Objective method, std::uint64_t seed) {
  const ScoreOptions options{cfg.eval.scorer, cfg.eval.renormalize};
  const auto records =
      score(model, data.test.features, data.test.num_classes, options, data.test.labels);
  RunSummary s;
  s.seed = seed;
  s.method = method;
  s.scorer = cfg.eval.scorer;
  s.report = metric_report(records);
  Rng fsu_rng(cfg.eval.fsu_seed);
  s.fsu = fsu(model, data.test, cfg.eval.fsu_max_pairs, fsu_rng).pi_fsu;
  return s;
}

std::string summary_csv(const std::vector<RunSummary>& runs) {
  std::string s = "seed,method,scorer,aurc,e_aurc,auroc,aupr,fpr95,acc,fsu\n";
  for (const auto& r : runs) {
    s += std::to_string(r.seed) + ',' + std::string(to_string(r.method)) + ',' +
         std::string(to_string(r.scorer)) + ',' + report_cells(r.report) + ',' +
         format_double(r.fsu) + '\n';
  }
  return s;
}

std::vector<AggregateRow> aggregate(const std::vector<RunSummary>& runs) {
  std::vector<AggregateRow> rows;
  for (const auto& r : runs) {
    const bool seen = std::any_of(rows.begin(), rows.end(), [&](const AggregateRow& a) {
      return a.method == r.method && a.scorer == r.scorer;
    });
    if (seen) continue;
    std::vector<const RunSummary*> group;
    for (const auto& o : runs) {
      if (o.method == r.method && o.scorer == r.scorer) group.push_back(&o);
    }
    const double n = static_cast<double>(group.size());
    auto stats = [&](auto field) {
      double mean = 0.0;
      for (const auto* g : group) mean += field(*g);
      mean /= n;
      double var = 0.0;
      for (const auto* g : group) var += (field(*g) - mean) * (field(*g) - mean);
      return std::pair{mean, std::sqrt(var / n)};
    };
    AggregateRow row;
    row.method = r.method;
    row.scorer = r.scorer;
    row.n_seeds = group.size();
    std::tie(row.mean.aurc, row.std.aurc) = stats([](const RunSummary& x) { return x.report.aurc; });
    std::tie(row.mean.e_aurc, row.std.e_aurc) = stats([](const RunSummary& x) { return x.report.e_aurc; });
    std::tie(row.mean.auroc, row.std.auroc) = stats([](const RunSummary& x) { return x.report.auroc; });
    std::tie(row.mean.aupr, row.std.aupr) = stats([](const RunSummary& x) { return x.report.aupr; });
    std::tie(row.mean.fpr95, row.std.fpr95) = stats([](const RunSummary& x) { return x.report.fpr95; });
    std::tie(row.mean.acc, row.std.acc) = stats([](const RunSummary& x) { return x.report.acc; });
    std::tie(row.fsu_mean, row.fsu_std) = stats([](const RunSummary& x) { return x.fsu; });
    rows.push_back(row);
  }
  return rows;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::string s =
      "method,scorer,n_seeds,aurc_mean,aurc_std,e_aurc_mean,e_aurc_std,auroc_mean,auroc_std,"
      "aupr_mean,aupr_std,fpr95_mean,fpr95_std,acc_mean,acc_std,fsu_mean,fsu_std\n";
  for (const auto& r : rows) {
    auto pair = [](double m, double sd) { return format_double(m) + ',' + format_double(sd); };
    s += std::string(to_string(r.method)) + ',' + std::string(to_string(r.scorer)) + ',' +
         std::to_string(r.n_seeds) + ',' + pair(r.mean.aurc, r.std.aurc) + ',' +
         pair(r.mean.e_aurc, r.std.e_aurc) + ',' + pair(r.mean.auroc, r.std.auroc) + ',' +
         pair(r.mean.aupr, r.std.aupr) + ',' + pair(r.mean.fpr95, r.std.fpr95) + ',' +
         pair(r.mean.acc, r.std.acc) + ',' + pair(r.fsu_mean, r.fsu_std) + '\n';
  }
  return s;
}

TrainResult run_train(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  const auto data = build_data(cfg);
  auto result = train(cfg.train, data.train, data.outliers ? &*data.outliers : nullptr, data.test);
  write_file_atomic(out_dir / "manifest.txt", emit_config(cfg));
  save_checkpoint(result.model, out_dir / "model.omck");
  write_file_atomic(out_dir / "log.csv", result.log.to_csv());
  return result;
}

std::filesystem::path run_checkpoint_path(const std::filesystem::path& out_dir, Objective method,
                                          std::uint64_t seed) {
  return out_dir / "checkpoints" /
         (std::string(to_string(method)) + "_seed" + std::to_string(seed) + ".omck");
}

CompareResult run_compare(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  const auto data = build_data(cfg);
  CompareResult result;
  for (Objective method : cfg.methods) {
    for (std::uint64_t seed : cfg.seeds) {
      TrainConfig tc = cfg.train;
      tc.objective = method;
      tc.seed = seed;
      const auto trained =
          train(tc, data.train, uses_outliers(method) ? &*data.outliers : nullptr, data.test);
      save_checkpoint(trained.model, run_checkpoint_path(out_dir, method, seed));
      result.runs.push_back(evaluate_model(trained.model, data, cfg, method, seed));
    }
  }
  result.aggregates = aggregate(result.runs);
  write_file_atomic(out_dir / "manifest.txt", emit_config(cfg));
  write_file_atomic(out_dir / "summary.csv", summary_csv(result.runs));
  write_file_atomic(out_dir / "aggregate.csv", aggregate_csv(result.aggregates));
  return result;
}

std::string curve_csv(const CurvePoints& curve) {
  std::string s = "x,y\n";
  for (const auto& [x, y] : curve.points) s += format_double(x) + ',' + format_double(y) + '\n';
  return s;
}

std::string curve_svg(const CurvePoints& curve) {
  constexpr double kW = 480.0;
  constexpr double kH = 360.0;
  constexpr double kPad = 40.0;
  double ymin = 0.0;
  double ymax = 1.0;
  for (const auto& p : curve.points) {
    ymin = std::min(ymin, p.second);
    ymax = std::max(ymax, p.second);
  }
  auto px = [&](double x) { return kPad + x * (kW - 2 * kPad); };
  auto py = [&](double y) { return kH - kPad - (y - ymin) / (ymax - ymin) * (kH - 2 * kPad); };
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"360\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"480\" height=\"360\" fill=\"white\"/>\n";
  s += "<text x=\"40\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" +
       std::string(to_string(curve.kind)) + "</text>\n";
  s += "<polyline fill=\"none\" stroke=\"black\" points=\"" + format_double(px(0)) + "," +
       format_double(py(ymin)) + " " + format_double(px(0)) + "," + format_double(py(ymax)) + " " +
       format_double(px(0)) + "," + format_double(py(ymin)) + " " + format_double(px(1)) + "," +
       format_double(py(ymin)) + "\"/>\n";
  s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    if (i) s += ' ';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f,%.3f", px(curve.points[i].first),
                  py(curve.points[i].second));
    s += buf;
  }
  s += "\"/>\n</svg>\n";
  return s;
}

std::vector<CurvePoints> run_curves(const MlpModel& model, const LabeledDataset& test,
                                    const ScoreOptions& options,
                                    const std::vector<CurveKind>& kinds,
                                    const std::filesystem::path& out_dir, bool svg) {
  if (test.dim() != model.input_dim()) {
    throw DimensionError("dataset dimension " + std::to_string(test.dim()) +
                         " does not match the checkpoint input " +
                         std::to_string(model.input_dim()));
  }
  const auto records = score(model, test.features, test.num_classes, options, test.labels);
  std::vector<CurvePoints> out;
  for (CurveKind kind : kinds) {
    out.push_back(curve(records, kind));
    const std::string name(to_string(kind));
    write_file_atomic(out_dir / (name + ".csv"), curve_csv(out.back()));
    if (svg) write_file_atomic(out_dir / (name + ".svg"), curve_svg(out.back()));
  }
  return out;
}

DensityConfig density_config(const TheoremSpec& spec) {
  if (spec.sigma.size() != spec.d * spec.d) {
    throw ConfigError("theorem.sigma needs d*d = " + std::to_string(spec.d * spec.d) + " entries");
  }
  if (spec.mu_bar.size() != spec.d) throw ConfigError("theorem.mu_bar needs d entries");
  DensityConfig cfg;
  cfg.sigma = Matrix(spec.d, spec.d, spec.sigma);
  cfg.mu_bar = spec.mu_bar;
  cfg.extent = spec.extent;
  cfg.resolution = spec.resolution;
  cfg.margin = spec.margin;
  return cfg;
}

TheoremRun run_theorem(const TheoremSpec& spec, const std::filesystem::path& out_dir) {
  const auto cfg = density_config(spec);
  TheoremRun run;
  run.report = verify_theorem(cfg);
  run.boundary = empirical_boundary(cfg);

  Rng rng(spec.seed);
  Rng id_rng = rng.fork(1);
  Rng out_rng = rng.fork(2);
  Rng mix_rng = rng.fork(3);
  std::vector<double> id(spec.n_samples);
  std::vector<double> outliers(spec.n_samples);
  for (double& v : id) v = id_rng.normal();
  for (double& v : outliers) v = out_rng.normal(spec.outlier_mean, 1.0);
  run.histogram = empirical_mix_density(id, outliers, spec.alpha, spec.n_mix,
                                        {spec.hist_lo, spec.hist_hi, spec.hist_bins}, mix_rng);

  std::string t = "holds,points_checked,min_margin,min_gap,empirical_boundary,worst_point\n";
  std::string worst;
  for (std::size_t i = 0; i < run.report.worst_point.size(); ++i) {
    worst += (i ? ";" : "") + format_double(run.report.worst_point[i]);
  }
  t += std::string(run.report.holds ? "true" : "false") + ',' +
       std::to_string(run.report.points_checked) + ',' + format_double(run.report.min_margin) +
       ',' + format_double(run.report.min_gap) + ',' + format_double(run.boundary) + ',' + worst +
       '\n';
  write_file_atomic(out_dir / "theorem.csv", t);

  std::string h = "bin_lo,bin_hi,id_density,mixed_density\n";
  for (std::size_t b = 0; b + 1 < run.histogram.edges.size(); ++b) {
    h += format_double(run.histogram.edges[b]) + ',' + format_double(run.histogram.edges[b + 1]) +
         ',' + format_double(run.histogram.id_density[b]) + ',' +
         format_double(run.histogram.mixed_density[b]) + '\n';
  }
  write_file_atomic(out_dir / "histogram.csv", h);
  return run;
}

}  // namespace openmix
