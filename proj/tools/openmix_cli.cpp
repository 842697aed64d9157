#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "openmix/checkpoint.hpp"
#include "openmix/config.hpp"
#include "openmix/error.hpp"
#include "openmix/experiment.hpp"
#include "openmix/io.hpp"

namespace fs = std::filesystem;
using namespace openmix;

namespace {

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string objective;
  std::string scorer;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Config file of key = value lines");
  cmd->add_option("--set", o.sets, "Override one config key (key=value), repeatable");
  cmd->add_option("--seed", o.seed, "Training seed (compare: run only this seed)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--objective", o.objective, "msp, oe, rc, ot, mixup or openmix");
  cmd->add_option("--scorer", o.scorer, "msp, neg_entropy, max_logit or energy");
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_config_value(cfg, trim(std::string_view(s).substr(0, eq)),
                       trim(std::string_view(s).substr(eq + 1)));
  }
  if (o.seed) {
    cfg.train.seed = *o.seed;
    cfg.seeds = {*o.seed};
  }
  if (!o.objective.empty()) apply_config_value(cfg, "train.objective", o.objective);
  if (!o.scorer.empty()) apply_config_value(cfg, "eval.scorer", o.scorer);
  if (!o.out.empty()) cfg.out = o.out;
  cfg.validate();
  return cfg;
}

std::string pct(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pm(double mean, double sd, double scale = 1.0, int digits = 2) {
  if (std::isnan(mean)) return "n/a";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f±%.*f", digits, mean * scale, digits, sd * scale);
  return buf;
}

void print_header() {
  std::printf("%-8s %-10s %8s %10s %10s %8s %8s %8s %8s\n", "method", "scorer", "acc",
              "AURC(e3)", "E-AURC(e3)", "AUROC", "AUPR", "FPR95", "FSU");
}

void print_run(const RunSummary& r) {
  std::printf("%-8s %-10s %8s %10s %10s %8s %8s %8s %8.4f\n",
              std::string(to_string(r.method)).c_str(), std::string(to_string(r.scorer)).c_str(),
              pct(r.report.acc).c_str(), pct(r.report.aurc * 1e3).c_str(),
              pct(r.report.e_aurc * 1e3).c_str(), pct(r.report.auroc).c_str(),
              pct(r.report.aupr).c_str(), pct(r.report.fpr95).c_str(), r.fsu);
}

void print_ood(const MlpModel& model, const ExperimentData& data, const ExperimentConfig& cfg) {
  if (!data.ood) return;
  const auto recs = ood_records(model, data.test.features, data.ood->features,
                                data.test.num_classes, {cfg.eval.scorer, cfg.eval.renormalize});
  std::printf("OOD AUROC %.2f\n", 100.0 * auroc(recs));
}

int cmd_train(const CommonOptions& o) {
  const auto cfg = resolve(o);
  const fs::path out = cfg.out;
  const auto result = run_train(cfg, out);
  const auto data = build_data(cfg);
  print_header();
  print_run(evaluate_model(result.model, data, cfg, cfg.train.objective, cfg.train.seed));
  print_ood(result.model, data, cfg);
  std::printf("wrote %s\n", (out / "model.omck").string().c_str());
  return 0;
}

int cmd_eval(const CommonOptions& o, const std::string& checkpoint) {
  const auto cfg = resolve(o);
  const auto model = load_checkpoint(checkpoint);
  const auto data = build_data(cfg);
  const std::size_t k = data.test.num_classes;
  if (model.output_dim() != k && model.output_dim() != k + 1) {
    throw DimensionError("checkpoint has " + std::to_string(model.output_dim()) +
                         " outputs; the data has " + std::to_string(k) + " classes");
  }
  const Objective label = model.output_dim() == k + 1 ? Objective::openmix : cfg.train.objective;
  print_header();
  print_run(evaluate_model(model, data, cfg, label, cfg.train.seed));
  print_ood(model, data, cfg);
  return 0;
}

int cmd_compare(const CommonOptions& o) {
  const auto cfg = resolve(o);
  const auto result = run_compare(cfg, cfg.out);
  std::printf("%-8s %-10s %5s %12s %14s %12s %12s %14s\n", "method", "scorer", "seeds", "acc",
              "AURC(e3)", "AUROC", "FPR95", "FSU");
  for (const auto& a : result.aggregates) {
    std::printf("%-8s %-10s %5zu %12s %14s %12s %12s %14s\n",
                std::string(to_string(a.method)).c_str(), std::string(to_string(a.scorer)).c_str(),
                a.n_seeds, pm(a.mean.acc, a.std.acc).c_str(),
                pm(a.mean.aurc, a.std.aurc, 1e3).c_str(), pm(a.mean.auroc, a.std.auroc).c_str(),
                pm(a.mean.fpr95, a.std.fpr95).c_str(), pm(a.fsu_mean, a.fsu_std, 1.0, 4).c_str());
  }
  std::printf("wrote %s\n", (fs::path(cfg.out) / "summary.csv").string().c_str());
  return 0;
}

std::vector<CurveKind> parse_kinds(const std::string& list) {
  std::vector<CurveKind> kinds;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) kinds.push_back(parse_curve_kind(trim(item)));
  }
  if (kinds.empty()) throw ConfigError("--kinds is empty");
  return kinds;
}

int cmd_curves(const CommonOptions& o, const std::string& checkpoint, const std::string& kinds,
               bool svg) {
  const auto cfg = resolve(o);
  const auto model = load_checkpoint(checkpoint);
  const auto data = build_data(cfg);
  const auto curves = run_curves(model, data.test, {cfg.eval.scorer, cfg.eval.renormalize},
                                 parse_kinds(kinds), cfg.out, svg);
  for (const auto& c : curves) {
    std::printf("%-20s %zu points\n", std::string(to_string(c.kind)).c_str(), c.points.size());
  }
  return 0;
}

int cmd_fsu(const CommonOptions& o, const std::string& checkpoint) {
  const auto cfg = resolve(o);
  const auto model = load_checkpoint(checkpoint);
  const auto data = build_data(cfg);
  Rng rng(cfg.eval.fsu_seed);
  const auto report = fsu(model, data.test, cfg.eval.fsu_max_pairs, rng);
  std::printf("%s\n", report.to_json().c_str());
  return 0;
}

int cmd_theorem(const CommonOptions& o) {
  const auto cfg = resolve(o);
  const auto run = run_theorem(cfg.theorem, cfg.out);
  std::printf("holds             %s\n", run.report.holds ? "true" : "false");
  std::printf("points checked    %zu\n", run.report.points_checked);
  std::printf("min rel. margin   %.6g\n", run.report.min_margin);
  std::printf("boundary |x'v|    %.4f\n", run.boundary);
  std::printf("wrote %s\n", (fs::path(cfg.out) / "theorem.csv").string().c_str());
  return run.report.holds ? 0 : 1;
}

int cmd_gen_data(const CommonOptions& o) {
  const auto cfg = resolve(o);
  const auto data = build_data(cfg);
  const fs::path out = cfg.out;
  save_csv(data.train, out / "train.csv");
  save_csv(data.test, out / "test.csv");
  if (data.outliers) save_csv(*data.outliers, out / "outliers.csv");
  if (data.ood) save_csv(*data.ood, out / "ood.csv");
  std::printf("train %zu  test %zu  outliers %zu  ood %zu  -> %s\n", data.train.size(),
              data.test.size(), data.outliers ? data.outliers->size() : 0,
              data.ood ? data.ood->size() : 0, out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Outlier-mixing experiments for misclassification detection"};
  app.require_subcommand(1);

  CommonOptions train_o, eval_o, compare_o, curves_o, fsu_o, theorem_o, gen_o;
  std::string eval_ck, curves_ck, fsu_ck;
  std::string kinds = "risk_coverage,accuracy_rejection,roc,pr";
  bool svg = false;

  auto* train = app.add_subcommand("train", "Train one model");
  add_common(train, train_o);
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  add_common(eval, eval_o);
  eval->add_option("--checkpoint", eval_ck, "Model checkpoint")->required();
  auto* compare = app.add_subcommand("compare", "Train and evaluate every method x seed");
  add_common(compare, compare_o);
  auto* curves = app.add_subcommand("curves", "Write curve CSVs for a checkpoint");
  add_common(curves, curves_o);
  curves->add_option("--checkpoint", curves_ck, "Model checkpoint")->required();
  curves->add_option("--kinds", kinds, "Comma-separated curve kinds");
  curves->add_flag("--svg", svg, "Also write SVG plots");
  auto* fsu_cmd = app.add_subcommand("fsu", "Feature-space separability of a checkpoint");
  add_common(fsu_cmd, fsu_o);
  fsu_cmd->add_option("--checkpoint", fsu_ck, "Model checkpoint")->required();
  auto* theorem = app.add_subcommand("theorem", "Check the low-density claim on a grid");
  add_common(theorem, theorem_o);
  auto* gen = app.add_subcommand("gen-data", "Write the generated datasets as CSV");
  add_common(gen, gen_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*train) return cmd_train(train_o);
    if (*eval) return cmd_eval(eval_o, eval_ck);
    if (*compare) return cmd_compare(compare_o);
    if (*curves) return cmd_curves(curves_o, curves_ck, kinds, svg);
    if (*fsu_cmd) return cmd_fsu(fsu_o, fsu_ck);
    if (*theorem) return cmd_theorem(theorem_o);
    if (*gen) return cmd_gen_data(gen_o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
