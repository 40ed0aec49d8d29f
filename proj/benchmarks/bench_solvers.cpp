#include <benchmark/benchmark.h>

#include "otmc/coupling.hpp"
#include "otmc/envs.hpp"
#include "otmc/operators.hpp"
#include "otmc/pairwise.hpp"
#include "otmc/solvers.hpp"

namespace {

using namespace otmc;

DiscountedProblem instance(int n) { return random_problem(n, n, 0.9, 42 + n); }

void BM_BellmanSinkhornApply(benchmark::State& state) {
  const DiscountedProblem problem = instance(static_cast<int>(state.range(0)));
  const TransitionCoupling pi = product_coupling(problem);
  ValueTableAxis value = zero_axis_value(Axis::X, problem);
  for (auto _ : state) {
    value = apply_bellman_sinkhorn(pi, value, problem, 1.0);
    benchmark::DoNotOptimize(value.values.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BellmanSinkhornApply)->RangeMultiplier(2)->Range(4, 32)->Complexity();

void BM_MultiplicativeUpdate(benchmark::State& state) {
  const DiscountedProblem problem = instance(static_cast<int>(state.range(0)));
  const TransitionCoupling pi = product_coupling(problem);
  const QTable q = q_from_value(PairValue::Zero(problem.npairs()), problem);
  for (auto _ : state) {
    TransitionCoupling next = multiplicative_update(Axis::X, pi, q, problem, 0.5);
    benchmark::DoNotOptimize(next.table.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MultiplicativeUpdate)->RangeMultiplier(2)->Range(4, 32)->Complexity();

void BM_RoundTransitionCoupling(benchmark::State& state) {
  const DiscountedProblem problem = instance(static_cast<int>(state.range(0)));
  const TransitionCoupling pi = product_coupling(problem);
  for (auto _ : state) {
    TransitionCoupling rounded = round_transition_coupling(pi, problem);
    benchmark::DoNotOptimize(rounded.table.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RoundTransitionCoupling)->RangeMultiplier(2)->Range(4, 32)->Complexity();

void BM_PolicyEvaluation(benchmark::State& state) {
  const DiscountedProblem problem = instance(static_cast<int>(state.range(0)));
  const TransitionCoupling pi = product_coupling(problem);
  for (auto _ : state) {
    PairValue value = policy_evaluation(pi, problem);
    benchmark::DoNotOptimize(value.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PolicyEvaluation)->RangeMultiplier(2)->Range(4, 24)->Complexity();

void BM_ExactBellmanSweep(benchmark::State& state) {
  const DiscountedProblem problem = instance(static_cast<int>(state.range(0)));
  PairValue value = PairValue::Zero(problem.npairs());
  for (auto _ : state) {
    BellmanStep step = exact_bellman_operator(value, problem);
    benchmark::DoNotOptimize(step.value.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ExactBellmanSweep)->RangeMultiplier(2)->Range(4, 16)->Complexity();

void BM_SviIteration(benchmark::State& state) {
  const DiscountedProblem problem = instance(static_cast<int>(state.range(0)));
  SolverConfig config;
  config.inner_m = 3;
  config.collect_diagnostics = false;
  config.iterations = 20;
  for (auto _ : state) {
    SolveResult result = svi(problem, config);
    benchmark::DoNotOptimize(result.distance);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SviIteration)->RangeMultiplier(2)->Range(4, 24)->Complexity();

void BM_SpiIteration(benchmark::State& state) {
  const DiscountedProblem problem = instance(static_cast<int>(state.range(0)));
  SolverConfig config;
  config.inner_m = 3;
  config.collect_diagnostics = false;
  config.iterations = 20;
  for (auto _ : state) {
    SolveResult result = spi(problem, config);
    benchmark::DoNotOptimize(result.distance);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SpiIteration)->RangeMultiplier(2)->Range(4, 24)->Complexity();

}  // namespace

BENCHMARK_MAIN();
