// Serial reference kernels against their OpenMP counterparts, plus replay
// throughput. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <omp.h>

#include <cmath>

#include "spoofdet/features.hpp"
#include "spoofdet/grunet/kernels.hpp"
#include "spoofdet/random.hpp"
#include "spoofdet/synthgen.hpp"

using namespace spoofdet;

namespace {

std::vector<Window> random_windows(std::size_t n, std::size_t steps) {
  Rng rng(11);
  std::vector<Window> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].label = static_cast<int>(i % 2);
    out[i].ts.assign(steps, 0);
    out[i].x.resize(steps * kFeatureCount);
    for (double& v : out[i].x) v = 2.0 * uniform01(rng) - 1.0;
  }
  return out;
}

grunet::GruModel model_for(std::int64_t hidden) {
  grunet::GruModel m({kFeatureCount, static_cast<std::size_t>(hidden), 1, 32});
  m.init(3);
  return m;
}

template <bool Parallel>
void BM_BatchGradient(benchmark::State& state) {
  const auto model = model_for(state.range(0));
  const auto windows = random_windows(32, 200);
  std::vector<const Window*> batch;
  for (const auto& w : windows) batch.push_back(&w);
  const grunet::BatchSpec spec{.pos_weight = 1.0, .dropout = 0.1, .dropout_seed = 5};
  std::vector<double> grad;
  for (auto _ : state) {
    const double loss = Parallel ? grunet::batch_gradient_parallel(model, batch, spec, grad)
                                 : grunet::batch_gradient_serial(model, batch, spec, grad);
    benchmark::DoNotOptimize(loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
  state.counters["threads"] = omp_get_max_threads();
}

template <bool Parallel>
void BM_Predict(benchmark::State& state) {
  const auto model = model_for(state.range(0));
  const auto windows = random_windows(128, 200);
  for (auto _ : state) {
    auto p = Parallel ? grunet::predict_parallel(model, windows) : grunet::predict_serial(model, windows);
    benchmark::DoNotOptimize(p.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(windows.size()));
  state.counters["threads"] = omp_get_max_threads();
}

void BM_Replay(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.duration_ms = 3'000'000;
  cfg.mean_interval_ms = 10.0;
  const auto g = generate_stream(cfg);
  for (auto _ : state) {
    FeatureExtractor fx;
    double acc = 0.0;
    for (const auto& u : g.stream.updates) acc += fx.push(u).vol_variation;
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.stream.updates.size()));
}

}  // namespace

BENCHMARK(BM_BatchGradient<false>)->Name("batch_gradient/serial")->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchGradient<true>)->Name("batch_gradient/openmp")->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Predict<false>)->Name("predict/serial")->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Predict<true>)->Name("predict/openmp")->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Replay)->Name("replay")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
