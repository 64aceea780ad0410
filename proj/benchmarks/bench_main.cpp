#include <benchmark/benchmark.h>

#include "gml/autodiff.hpp"
#include "gml/graph_ops.hpp"
#include "gml/graphgen.hpp"
#include "gml/matrix.hpp"
#include "gml/nn.hpp"
#include "gml/rng.hpp"
#include "gml/stats.hpp"

namespace {

using namespace gml;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1), b = random_matrix(n, 16, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * 16));
}
BENCHMARK(BM_Matmul)->Arg(20)->Arg(50)->Arg(200);

void BM_GenBa(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gen_ba(n, n / 4, ++seed));
}
BENCHMARK(BM_GenBa)->Arg(30)->Arg(200);

void BM_GenEr(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gen_er(n, 0.2, ++seed));
}
BENCHMARK(BM_GenEr)->Arg(30)->Arg(200);

void BM_ConfigBenchmark(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_benchmark(BenchmarkKind::BaVsConfig, 30, 10, ++seed));
  }
}
BENCHMARK(BM_ConfigBenchmark);

void BM_Moments(benchmark::State& state) {
  const Graph g = gen_ba(static_cast<std::size_t>(state.range(0)), 5, 3);
  for (auto _ : state) benchmark::DoNotOptimize(moment_vector(g, 4));
}
BENCHMARK(BM_Moments)->Arg(30)->Arg(200);

void BM_KsStatistic(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  std::vector<double> x(n), y(n);
  for (auto& v : x) v = rng.uniform();
  for (auto& v : y) v = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(ks_statistic(x, y));
}
BENCHMARK(BM_KsStatistic)->Arg(30)->Arg(1000);

// One training step worth of work: forward and backward through the modular
// classifier on a single graph.
void BM_ModularForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Graph g = gen_ba(n, n / 4, 7);
  ModelSpec spec;
  spec.arch = Architecture::ModularGcn;
  spec.rules.assign(kAllRules.begin(), kAllRules.end());
  spec.layers = 3;
  spec.units = 16;
  spec.residual = true;
  spec.head = HeadKind::ClassifierMeanPool;
  const auto ops = GraphOperators::build(g, spec.rules);
  const auto params = init_params(spec, 1);
  const Matrix target{{0.0, 1.0}};
  for (auto _ : state) {
    BuiltModel model = build_model(spec, ops, params);
    const auto loss = model.tape.cross_entropy_loss(model.logits, model.tape.constant(target));
    benchmark::DoNotOptimize(model.tape.backward(loss));
  }
}
BENCHMARK(BM_ModularForwardBackward)->Arg(10)->Arg(30)->Arg(50);

void BM_FcForwardBackward(benchmark::State& state) {
  const Graph g = gen_er(20, 0.2, 3);
  ModelSpec spec;
  spec.arch = Architecture::FcBaseline;
  spec.units = static_cast<std::size_t>(state.range(0));
  spec.graph_size = 20;
  const auto params = init_params(spec, 1);
  const Matrix target(1, 20);
  for (auto _ : state) {
    BuiltModel model = build_model(spec, g, params);
    const auto loss = model.tape.mse_loss(model.output, model.tape.constant(target));
    benchmark::DoNotOptimize(model.tape.backward(loss));
  }
}
BENCHMARK(BM_FcForwardBackward)->Arg(20)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
