#include <random>

#include "benchmark/benchmark.h"

#include "gcica/graph.hpp"
#include "gcica/synthetic.hpp"

namespace {

gcica::Graph make_graph(int nodes_per_component) {
  gcica::SyntheticConfig cfg;
  cfg.nodes_per_component = nodes_per_component;
  cfg.seed = 1;
  gcica::Rng rng = gcica::make_rng(cfg.seed);
  return gcica::generate_backbone(cfg, rng).graph;
}

void BM_CombinatorialLaplacian(benchmark::State& state) {
  const gcica::Graph g = make_graph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gcica::combinatorial_laplacian(g));
}
BENCHMARK(BM_CombinatorialLaplacian)->Arg(10)->Arg(40);

void BM_SmoothnessPenalty(benchmark::State& state) {
  const gcica::Graph g = make_graph(static_cast<int>(state.range(0)));
  const gcica::Laplacian l = gcica::combinatorial_laplacian(g);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  gcica::Vector a(g.n_nodes());
  for (int i = 0; i < g.n_nodes(); ++i) a[i] = normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(gcica::smoothness_penalty(a, l));
}
BENCHMARK(BM_SmoothnessPenalty)->Arg(10)->Arg(40);

void BM_ConnectedComponents(benchmark::State& state) {
  const gcica::Graph g = make_graph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gcica::connected_components(g));
}
BENCHMARK(BM_ConnectedComponents)->Arg(10)->Arg(40);

}  // namespace
