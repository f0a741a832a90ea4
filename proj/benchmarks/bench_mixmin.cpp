// Microbenchmarks for the hot paths: objective/gradient evaluation at
// realistic table sizes, single solver steps, full fits, and the brute-force
// oracles. All inputs are seeded so runs are comparable across machines.

#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "mixmin/baselines.hpp"
#include "mixmin/objectives.hpp"
#include "mixmin/rng.hpp"
#include "mixmin/simplex.hpp"
#include "mixmin/solver.hpp"
#include "mixmin/synthworld.hpp"

namespace {

using namespace mixmin;

PredictionMatrix bench_matrix(std::size_t n, std::size_t p) {
  Rng rng = make_rng(7);
  PredictionMatrix m;
  m.loss_kind = LossKind::kCeUnconditional;
  m.num_samples = n;
  m.num_sources = p;
  m.source_ids = default_source_ids(p);
  m.scores.resize(n * p);
  for (auto& v : m.scores) v = std::log(uniform_range(rng, 0.05, 3.0));
  m.validate();
  return m;
}

MixtureWeights bench_weights(std::size_t p) {
  Rng rng = make_rng(11);
  MixtureWeights w;
  w.values = sample_simplex_uniform(p, rng);
  w.source_ids = default_source_ids(p);
  return w;
}

CategoricalWorld bench_world(std::size_t alphabet, std::size_t sources) {
  WorldSpec spec;
  spec.alphabet_size = alphabet;
  spec.num_sources = sources;
  spec.seed = 19;
  return gen_world(spec);
}

void BM_CeObjective(benchmark::State& state) {
  const auto m = bench_matrix(50000, 7);
  const auto w = bench_weights(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ce_objective(m, w));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(m.num_samples));
}
BENCHMARK(BM_CeObjective);

void BM_CeGradient(benchmark::State& state) {
  const auto m = bench_matrix(50000, 7);
  const auto w = bench_weights(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ce_gradient(m, w));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(m.num_samples));
}
BENCHMARK(BM_CeGradient);

void BM_EntropicStep(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const auto w = bench_weights(p);
  Rng rng = make_rng(23);
  GradientVector grad(p);
  for (auto& g : grad) g = uniform_range(rng, -2.0, 0.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(entropic_step(w, grad, 1.0));
  }
}
BENCHMARK(BM_EntropicStep)->Arg(7)->Arg(64);

void BM_MixminFit(benchmark::State& state) {
  const auto m =
      bench_matrix(static_cast<std::size_t>(state.range(0)), 7);
  SolverConfig config;
  config.record_trace = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mixmin_fit(m, config));
  }
}
BENCHMARK(BM_MixminFit)->Arg(1000)->Arg(10000);

void BM_GridSearch(benchmark::State& state) {
  const auto world = bench_world(6, 3);
  const auto m = exact_expectation_matrix(world, world.sources);
  const auto denominator = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(grid_search(m, denominator));
  }
}
BENCHMARK(BM_GridSearch)->Arg(50)->Arg(100);

void BM_DmOracle(benchmark::State& state) {
  const auto world = bench_world(64, 7);
  const auto w = bench_weights(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dm_oracle(world, w));
  }
}
BENCHMARK(BM_DmOracle);

}  // namespace

BENCHMARK_MAIN();
