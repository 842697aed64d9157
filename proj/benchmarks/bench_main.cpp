#include <benchmark/benchmark.h>

#include "openmix/datasets.hpp"
#include "openmix/metrics.hpp"
#include "openmix/mlp.hpp"
#include "openmix/objectives.hpp"
#include "openmix/trainer.hpp"

using namespace openmix;

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

void BM_Forward(benchmark::State& state) {
  Rng rng(1);
  const auto width = static_cast<std::size_t>(state.range(0));
  const auto model = MlpModel::glorot({2, width, width, 4}, rng);
  const auto x = gaussian(64, 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, x));
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(128);

void BM_OpenMixStep(benchmark::State& state) {
  Rng rng(2);
  const auto width = static_cast<std::size_t>(state.range(0));
  const auto model = MlpModel::glorot({2, width, width, 4}, rng);
  LabeledDataset batch{gaussian(64, 2, rng), std::vector<std::size_t>(64), 3};
  for (std::size_t i = 0; i < 64; ++i) batch.labels[i] = i % 3;
  const auto outliers = gaussian(64, 2, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(openmix_batch_loss(model, batch, outliers, MixConfig{}, rng));
  }
}
BENCHMARK(BM_OpenMixStep)->Arg(32)->Arg(128);

void BM_Auroc(benchmark::State& state) {
  Rng rng(3);
  std::vector<EvalRecord> records(static_cast<std::size_t>(state.range(0)));
  for (auto& r : records) {
    r.confidence = rng.uniform();
    r.correct = rng.uniform() < 0.9;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(auroc(records));
    benchmark::DoNotOptimize(aurc(records));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Auroc)->RangeMultiplier(10)->Range(1000, 100000)->Complexity();

void BM_TrainEpoch(benchmark::State& state) {
  Rng rng(4);
  const auto full = gen_gaussian_blobs(3, 500, 2, triangle_centers(4.0), 1.2, rng);
  const auto parts = split(full, 0.5, rng);
  OutlierParams p;
  p.r_inner = 3.0;
  p.r_outer = 4.5;
  const auto outliers = gen_outliers(OutlierFamily::annulus_blob, 2000, 2, p, rng);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.objective = Objective::openmix;
  for (auto _ : state) benchmark::DoNotOptimize(train(cfg, parts.train, &outliers, parts.test));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
