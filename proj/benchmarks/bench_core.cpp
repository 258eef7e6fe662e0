#include <benchmark/benchmark.h>

#include "precgd/certify.hpp"
#include "precgd/factored.hpp"
#include "precgd/optimizers.hpp"
#include "precgd/problems.hpp"

using namespace precgd;

namespace {

struct Setup {
  GroundTruth truth;
  std::shared_ptr<const CostModel> model;
  Matrix X;
};

Setup sensing(Index n, Index r) {
  auto truth = generateGroundTruth(n, spectrumForKappa(2, 1.0), 1);
  auto model = matrixSensingModel(truth, r, 0, 1, true);
  return {truth, model, initNearTruth(truth, r, 1e-2, 1)};
}

void BM_SensingGradient(benchmark::State& state) {
  const auto s = sensing(state.range(0), 4);
  for (auto _ : state) benchmark::DoNotOptimize(gradient(*s.model, s.X));
}
BENCHMARK(BM_SensingGradient)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_PrecGDStep(benchmark::State& state) {
  const auto s = sensing(state.range(0), 4);
  for (auto _ : state) {
    const double eta = etaAdaptive(*s.model, s.X);
    benchmark::DoNotOptimize(precgdStep(*s.model, s.X, 0.1, eta));
  }
}
BENCHMARK(BM_PrecGDStep)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_MinHessEig(benchmark::State& state) {
  const auto s = sensing(state.range(0), 3);
  EigenConfig cfg;
  cfg.maxIters = 200;
  for (auto _ : state) benchmark::DoNotOptimize(minHessEig(*s.model, s.X, cfg));
}
BENCHMARK(BM_MinHessEig)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_OneBitGradient(benchmark::State& state) {
  const Index n = state.range(0);
  auto truth = generateGroundTruth(n, spectrumForKappa(2, 1.0), 2);
  const auto model = oneBitModel(truth);
  const Matrix X = initNearTruth(truth, 4, 1e-2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(gradient(*model, X));
}
BENCHMARK(BM_OneBitGradient)->Arg(100)->Arg(300)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
