#include <benchmark/benchmark.h>

#include "treekernel/ensemble.hpp"
#include "treekernel/kernel.hpp"
#include "treekernel/krr.hpp"
#include "treekernel/random.hpp"
#include "treekernel/simulate.hpp"

using namespace treekernel;

namespace {

Dataset friedman_data(int n, int p, std::uint64_t seed) {
  const SimSetup setup = make_setup(SimName::friedman);
  auto rng = make_rng(seed);
  const SimSample sample = gen_continuous(setup, n, p, rng);
  return {sample.features, sample.continuous_target, Task::regression};
}

}  // namespace

static void BM_FitTree(benchmark::State& state) {
  const Dataset data = friedman_data(static_cast<int>(state.range(0)), 10, 1);
  TreeParams params;
  params.min_node_size = 5;
  params.mtry = 3;
  for (auto _ : state) {
    auto rng = make_rng(2);
    benchmark::DoNotOptimize(fit_tree(data, params, rng));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitTree)->RangeMultiplier(2)->Range(128, 2048)->Complexity();

static void BM_FitRf(benchmark::State& state) {
  const Dataset data = friedman_data(600, 20, 3);
  RfParams params;
  params.num_trees = static_cast<int>(state.range(0));
  params.tree.mtry = 4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_rf(data, params, 4));
  }
}
BENCHMARK(BM_FitRf)->Arg(25)->Arg(100);

static void BM_FitGbt(benchmark::State& state) {
  const Dataset data = friedman_data(600, 20, 5);
  GbtParams params;
  params.rounds = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_gbt(data, params));
  }
}
BENCHMARK(BM_FitGbt)->Arg(10)->Arg(50);

static void BM_EnsembleKernel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Dataset data = friedman_data(n, 10, 6);
  RfParams params;
  params.num_trees = 50;
  params.tree.mtry = 3;
  const Ensemble e = fit_rf(data, params, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ensemble_kernel(e, data.features));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_EnsembleKernel)->RangeMultiplier(2)->Range(128, 1024)->Complexity();

static void BM_KrrSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Dataset data = friedman_data(n, 10, 8);
  const KernelMatrix k = laplace_kernel(data.features, data.features, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_krr(k, data.target, 1e-6));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_KrrSolve)->RangeMultiplier(2)->Range(128, 1024)->Complexity();

static void BM_SimulateFriedman(benchmark::State& state) {
  const SimSetup setup = make_setup(SimName::friedman);
  for (auto _ : state) {
    auto rng = make_rng(9);
    benchmark::DoNotOptimize(
        gen_continuous(setup, static_cast<int>(state.range(0)), 20, rng));
  }
}
BENCHMARK(BM_SimulateFriedman)->Arg(800)->Arg(1600);

BENCHMARK_MAIN();
