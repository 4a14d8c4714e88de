#include "benchmark/benchmark.h"

#include "gcica/ica.hpp"
#include "gcica/model.hpp"
#include "gcica/solver.hpp"
#include "gcica/synthetic.hpp"

namespace {

struct FitSetup {
  gcica::SyntheticInstance instance;
  gcica::SolverConfig cfg;
};

FitSetup make_setup() {
  gcica::SyntheticConfig syn;
  syn.n_components = 3;
  syn.nodes_per_component = 8;
  syn.t_samples = 400;
  syn.noise_sigma = 0.01;
  syn.seed = 11;
  FitSetup setup{gcica::make_instance(syn), {}};
  setup.cfg.n_components = 6;
  setup.cfg.seed = 3;
  return setup;
}

void BM_InnerSolve(benchmark::State& state) {
  const FitSetup setup = make_setup();
  const gcica::Matrix s = gcica::shrunk_correlation(setup.instance.observations, 0.01);
  const gcica::Matrix s_inv = s.inverse();
  const int n = setup.instance.graph.n_nodes();
  gcica::Matrix a = gcica::Matrix::Constant(setup.cfg.n_components, n, 0.2);
  gcica::Vector gamma(n);
  for (int i = 0; i < n; ++i) gamma[i] = 0.5;
  a = gcica::apply_variance_constraint(a, gamma);
  for (auto _ : state)
    benchmark::DoNotOptimize(gcica::inner_solve(a, gamma, s_inv, setup.cfg));
}
BENCHMARK(BM_InnerSolve)->Unit(benchmark::kMillisecond);

void BM_Fit(benchmark::State& state) {
  FitSetup setup = make_setup();
  setup.cfg.max_outer = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        gcica::fit(setup.instance.observations, setup.instance.graph, setup.cfg));
}
BENCHMARK(BM_Fit)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_VanillaWarmStart(benchmark::State& state) {
  const FitSetup setup = make_setup();
  for (auto _ : state)
    benchmark::DoNotOptimize(gcica::vanilla_ica_warm_start(setup.instance.observations,
                                                           setup.cfg.n_components, 3));
}
BENCHMARK(BM_VanillaWarmStart)->Unit(benchmark::kMillisecond);

}  // namespace
