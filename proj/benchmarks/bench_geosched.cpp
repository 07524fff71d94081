#include <benchmark/benchmark.h>

#include <vector>

#include "geosched/cost_estimator.hpp"
#include "geosched/samplers.hpp"
#include "geosched/schedule_optimizer.hpp"
#include "geosched/score_model.hpp"
#include "geosched/target_oracle.hpp"

using namespace geosched;

namespace {

void BM_NetworkForward(benchmark::State& state) {
  NetworkConfig cfg;
  cfg.width = static_cast<int>(state.range(0));
  const ScoreNetwork net(cfg, 1);
  const Points x = sample(bimodal_target(), 256, 2);
  const std::vector<double> t(256, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(net.predict_noise(x, t));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_NetworkForward)->Arg(32)->Arg(128);

void BM_DsmLossAndGradient(benchmark::State& state) {
  NetworkConfig cfg;
  cfg.width = static_cast<int>(state.range(0));
  const ScoreNetwork net(cfg, 1);
  const Points x0 = sample(bimodal_target(), 256, 2);
  std::vector<double> times(50);
  for (int i = 0; i < 50; ++i) times[i] = (i + 1) / 50.0;
  const DsmBatch batch = make_dsm_batch(x0, NoiseSchedule{}, times, 3);
  for (auto _ : state) benchmark::DoNotOptimize(dsm_loss(net, batch));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_DsmLossAndGradient)->Arg(32)->Arg(128);

void BM_OracleProfile(benchmark::State& state) {
  const auto src = ScoreSource::oracle(DiffusedGmm(bimodal_target(), NoiseSchedule{}));
  const auto disc = DiscretisationSchedule::uniform(50);
  const auto kind = state.range(0) == 0 ? CostKind::Corrector : CostKind::Predictor;
  for (auto _ : state) benchmark::DoNotOptimize(profile(src, disc, kind, 1024, 4));
}
BENCHMARK(BM_OracleProfile)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_UpdateSchedule(benchmark::State& state) {
  const int steps = static_cast<int>(state.range(0));
  const auto disc = DiscretisationSchedule::uniform(steps);
  std::vector<double> costs(steps);
  for (int i = 0; i < steps; ++i) costs[i] = 1.0 / (1.0 + i);
  for (auto _ : state) benchmark::DoNotOptimize(update_schedule(disc, costs));
}
BENCHMARK(BM_UpdateSchedule)->Arg(50)->Arg(1000);

void BM_ReverseSdeSampler(benchmark::State& state) {
  const auto src = ScoreSource::oracle(DiffusedGmm(bimodal_target(), NoiseSchedule{}));
  const SamplerConfig cfg{ReverseSde{}, DiscretisationSchedule::uniform(50), 5};
  for (auto _ : state) benchmark::DoNotOptimize(sample(cfg, src, static_cast<int>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ReverseSdeSampler)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
