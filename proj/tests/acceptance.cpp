// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "openmix/checkpoint.hpp"
#include "openmix/density.hpp"
#include "openmix/experiment.hpp"
#include "openmix/io.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace openmix;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Gate {
  int failures = 0;
  int total = 0;

  void run(int id, const char* name, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++total;
    if (!o.pass) ++failures;
    std::printf("%s  C%-2d %-34s %s  [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Shared state for the experiment criteria.
struct CompareRun {
  ExperimentConfig cfg;
  ExperimentData data;
  CompareResult result;
  fs::path dir;
  std::map<Objective, AggregateRow> by_method;
};

CompareRun& compare_run() {
  static CompareRun run = [] {
    CompareRun r;
    r.dir = fs::temp_directory_path() / "openmix_acceptance" / "compare_a";
    fs::remove_all(r.dir);
    r.data = build_data(r.cfg);
    r.result = run_compare(r.cfg, r.dir);
    for (const auto& a : r.result.aggregates) r.by_method[a.method] = a;
    return r;
  }();
  return run;
}

Outcome metric_oracles() {
  Rng rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto recs = oracle::random_records(2 + rng.index(499), rng);
    worst = std::max(worst, std::abs(aurc(recs) - oracle::aurc(recs)));
    worst = std::max(worst, std::abs(auroc(recs) - oracle::auroc(recs)));
    worst = std::max(worst, std::abs(fpr_at_95tpr(recs) - oracle::fpr_at_95tpr(recs)));
  }
  return {worst <= 1e-9, fmt("100 sets, max |diff| %.2e (tol 1e-9)", worst)};
}

// A draw whose pre-activations sit within the step of a ReLU kink has no
// valid central difference; such draws are detected by comparing two step
// sizes and redrawn.
Outcome gradients() {
  Rng rng(77);
  double worst = 0.0;
  int redrawn = 0;
  for (auto objective : {Objective::msp, Objective::oe, Objective::rc, Objective::ot,
                         Objective::mixup, Objective::openmix}) {
    for (int trial = 0; trial < 20;) {
      const std::size_t k = 2 + rng.index(3);
      const std::size_t h1 = 1 + rng.index(8), h2 = 1 + rng.index(8);
      const auto model = testing::random_model({2, h1, h2, output_dim(objective, k)}, rng);
      const auto batch = testing::random_batch(4 + rng.index(8), 2, k, rng);
      const auto outliers = testing::random_matrix(batch.size(), 2, rng, 3.0);
      ObjectiveParams params;
      const Rng stream = rng.fork(1000 + std::uint64_t(trial));
      const auto loss = [&](const MlpModel& m) {
        Rng r = stream;
        return objective_batch_loss(objective, m, batch, &outliers, params, r);
      };
      const auto coarse = testing::numeric_gradient(model, loss, 1e-6);
      const auto fine = testing::numeric_gradient(model, loss, 1e-7);
      if (testing::relative_error(coarse, fine) > 1e-6) {
        ++redrawn;
        continue;
      }
      worst = std::max(worst, testing::relative_error(testing::flatten(loss(model).grads), coarse));
      ++trial;
    }
  }
  return {worst < 1e-5, fmt("6 objectives x 20 nets, max rel err %.2e (tol 1e-5), %.0f kink "
                            "draws redrawn",
                            worst, redrawn)};
}

Outcome mixed_labels() {
  Rng rng(5);
  const std::size_t k = 3;
  double worst_sum = 0.0;
  bool reject_exact = true, others_zero = true;
  for (int t = 0; t < 100000; ++t) {
    const double lambda = rng.beta(10.0, 10.0);
    const std::vector<double> x = {rng.normal(), rng.normal()};
    const std::vector<double> xt = {rng.normal(), rng.normal()};
    const std::size_t y = rng.index(k);
    const auto m = openmix_transform(x, y, xt, k, lambda);
    double s = 0.0;
    for (double p : m.label.probs()) s += p;
    worst_sum = std::max(worst_sum, std::abs(s - 1.0));
    if (m.label[k] != 1.0 - lambda || m.label[y] != lambda) reject_exact = false;
    for (std::size_t j = 0; j < k; ++j) {
      if (j != y && m.label[j] != 0.0) others_zero = false;
    }
  }
  bool endpoints = true;
  const std::vector<double> x = {1.0, 2.0}, xt = {-3.0, 4.0};
  for (std::size_t y = 0; y < k; ++y) {
    const auto one = openmix_transform(x, y, xt, k, 1.0);
    const auto zero = openmix_transform(x, y, xt, k, 0.0);
    for (std::size_t j = 0; j <= k; ++j) {
      endpoints = endpoints && one.label[j] == (j == y ? 1.0 : 0.0);
      endpoints = endpoints && zero.label[j] == (j == k ? 1.0 : 0.0);
    }
    endpoints = endpoints && one.input == x && zero.input == xt;
  }
  const bool ok = worst_sum <= 1e-12 && reject_exact && others_zero && endpoints;
  return {ok, fmt("1e5 draws, max |sum-1| %.1e (tol 1e-12), reject=1-lambda exact %.0f, "
                  "one-hot endpoints %.0f",
                  worst_sum, reject_exact && others_zero, endpoints)};
}

Outcome theorem() {
  DensityConfig base;
  base.sigma = Matrix{{1.0}};
  base.mu_bar = {1.0};
  const std::vector<double> x = {1.5};
  const double f = density_f(x, base), fbar = density_fbar(x, base);
  const bool spots = std::abs(f - 0.12952) <= 1e-4 && std::abs(fbar - 0.15716) <= 1e-4;
  bool all = verify_theorem(base).holds;
  Rng rng(9);
  std::size_t points = 0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 1 + rng.index(3);
    const auto a = testing::random_matrix(d, d, rng);
    DensityConfig cfg;
    cfg.sigma = Matrix(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double s = i == j ? 0.25 : 0.0;
        for (std::size_t l = 0; l < d; ++l) s += a(i, l) * a(j, l);
        cfg.sigma(i, j) = s;
      }
    }
    cfg.mu_bar.resize(d);
    double n = 0.0;
    for (double& v : cfg.mu_bar) {
      v = rng.normal();
      n += v * v;
    }
    for (double& v : cfg.mu_bar) v /= std::sqrt(n);
    cfg.resolution = d == 1 ? 1201 : d == 2 ? 241 : 61;
    const auto r = verify_theorem(cfg);
    all = all && r.holds && r.points_checked > 0;
    points += r.points_checked;
  }
  return {spots && all,
          fmt("f(1.5)=%.5f fbar(1.5)=%.5f (tol 1e-4); 1-D + 20 random configs hold: %.0f "
              "(%.0f points)",
              f, fbar, all, double(points))};
}

Outcome misd_ordering() {
  auto& r = compare_run();
  const auto& msp = r.by_method.at(Objective::msp);
  const auto& oe = r.by_method.at(Objective::oe);
  const auto& om = r.by_method.at(Objective::openmix);
  bool acc_ok = true;
  for (const auto& [m, a] : r.by_method) acc_ok = acc_ok && a.mean.acc >= 85.0 && a.mean.acc <= 93.0;
  const bool ok = acc_ok && om.mean.auroc > msp.mean.auroc &&
                  oe.mean.auroc <= msp.mean.auroc + 0.5 && om.mean.aurc < msp.mean.aurc;
  return {ok, fmt("AUROC openmix %.2f > msp %.2f, oe %.2f <= msp+0.5", om.mean.auroc,
                  msp.mean.auroc, oe.mean.auroc) +
                  fmt("; AURCx1e3 openmix %.2f < msp %.2f; acc msp %.2f (85-93)",
                      om.mean.aurc * 1e3, msp.mean.aurc * 1e3, msp.mean.acc)};
}

Outcome fsu_ordering() {
  auto& r = compare_run();
  const double msp = r.by_method.at(Objective::msp).fsu_mean;
  const double oe = r.by_method.at(Objective::oe).fsu_mean;
  const double om = r.by_method.at(Objective::openmix).fsu_mean;
  return {oe < msp && om > oe,
          fmt("FSU oe %.4f < msp %.4f, openmix %.4f > oe", oe, msp, om)};
}

Outcome reject_head() {
  auto& r = compare_run();
  Rng rng(31);
  const std::size_t k = r.data.test.num_classes;
  const auto x = testing::random_matrix(10000, 2, rng, 8.0);
  bool ok = true;
  double worst = 0.0;
  for (auto seed : r.cfg.seeds) {
    const auto model = load_checkpoint(run_checkpoint_path(r.dir, Objective::openmix, seed));
    ok = ok && model.output_dim() == k + 1;
    const auto recs = score(model, x, k, {});
    const auto p = softmax(forward(model, x).logits);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      ok = ok && recs[i].predicted < k;
      double best = 0.0;
      for (std::size_t j = 0; j < k; ++j) best = std::max(best, p(i, j));
      worst = std::max(worst, std::abs(recs[i].confidence - best));
    }
  }
  return {ok && worst == 0.0,
          fmt("5 checkpoints x 1e4 inputs, predicted < k, max |msp - max_{j<k} p_j| %.1e (tol 0)",
              worst)};
}

Outcome determinism() {
  auto& r = compare_run();
  const auto dir_b = fs::temp_directory_path() / "openmix_acceptance" / "compare_b";
  fs::remove_all(dir_b);
  run_compare(r.cfg, dir_b);
  std::size_t compared = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(r.dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), r.dir);
    ++compared;
    if (!fs::exists(dir_b / rel) || read_file(entry.path()) != read_file(dir_b / rel)) ++differing;
  }
  return {compared > 0 && differing == 0,
          fmt("two compare runs, %.0f files, %.0f differ (tol 0 bytes)", double(compared),
              double(differing))};
}

Outcome fsu_hand() {
  Rng rng(1);
  const auto r = fsu_from_features(Matrix{{0.0}, {2.0}, {10.0}, {12.0}},
                                   std::vector<std::size_t>{0, 0, 1, 1}, 2, 100, rng);
  return {std::abs(r.pi_fsu - 0.2) <= 1e-12,
          fmt("intra %.3f inter %.3f fsu %.6f (expect 0.2, tol 1e-12)", r.pi_intra, r.pi_inter,
              r.pi_fsu)};
}

Outcome ood_ordering() {
  auto& r = compare_run();
  std::map<Objective, double> mean;
  for (auto method : r.cfg.methods) {
    for (auto seed : r.cfg.seeds) {
      const auto model = load_checkpoint(run_checkpoint_path(r.dir, method, seed));
      const auto recs = ood_records(model, r.data.test.features, r.data.ood->features,
                                    r.data.test.num_classes, {});
      mean[method] += 100.0 * auroc(recs) / double(r.cfg.seeds.size());
    }
  }
  const double msp = mean[Objective::msp], oe = mean[Objective::oe],
               om = mean[Objective::openmix];
  return {oe >= msp && om >= msp,
          fmt("OOD AUROC msp %.2f, oe %.2f >= msp, openmix %.2f >= msp", msp, oe, om)};
}

}  // namespace

int main() {
  Gate gate;
  gate.run(1, "metric oracles", metric_oracles);
  gate.run(2, "finite-difference gradients", gradients);
  gate.run(3, "mixed labels", mixed_labels);
  gate.run(4, "low-density theorem", theorem);
  gate.run(5, "MisD ordering (5 seeds)", misd_ordering);
  gate.run(6, "FSU ordering", fsu_ordering);
  gate.run(7, "reject class never predicted", reject_head);
  gate.run(8, "bit-identical reruns", determinism);
  gate.run(9, "FSU hand case", fsu_hand);
  gate.run(10, "OOD detection ordering", ood_ordering);
  std::printf("SUMMARY  %d/%d criteria passed\n", gate.total - gate.failures, gate.total);
  return gate.failures == 0 ? 0 : 1;
}
