#include <benchmark/benchmark.h>

#include "securesense/design.hpp"
#include "securesense/evaluate.hpp"

using namespace securesense;

namespace {

// Arguments: horizon n; the state dimension is 8 and the input dimension 2 as in the benchmark.

void BM_FriendlyRiccati(benchmark::State& state) {
  const auto s = make_reference_setup(1, 8, 2, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(friendly_tables(s.model, s.objective));
}
BENCHMARK(BM_FriendlyRiccati)->Arg(25)->Arg(100);

void BM_AdversarialRiccati(benchmark::State& state) {
  const auto s = make_reference_setup(1, 8, 2, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(adversarial_tables(s.model, s.objective, s.attackers[0]));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AdversarialRiccati)->Arg(25)->Arg(50)->Arg(100)->Complexity()->Unit(benchmark::kMillisecond);

void BM_PrepareProblem(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto s = make_reference_setup(1, 8, 2, n);
  const auto set = assign_measures(enumerate_typical(n, 35, 2), NoInfiltrationMass{0.7});
  for (auto _ : state) benchmark::DoNotOptimize(prepare_problem(s.model, s.objective, s.attackers, set));
}
BENCHMARK(BM_PrepareProblem)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ChainedSdp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto s = make_reference_setup(1, 8, 2, n);
  const auto p = prepare_problem(s.model, s.objective, s.attackers,
                                 assign_measures(enumerate_typical(n, 35, 2), NoInfiltrationMass{0.7}));
  const auto sdp = p.sdp_problem();
  const DesignOptions opts;
  for (auto _ : state) benchmark::DoNotOptimize(solve_chained_sdp(sdp, opts.sdp));
  state.SetComplexityN(n);
}
BENCHMARK(BM_ChainedSdp)->Arg(25)->Arg(50)->Arg(100)->Complexity()->Unit(benchmark::kMillisecond);

void BM_RecursiveH(benchmark::State& state) {
  const auto s = make_reference_setup(1, 8, 2, 100);
  const auto ladder = propagate_open_loop(s.model);
  const auto gains = baseline_design(BaselineKind::Classical, s.model);
  for (auto _ : state) benchmark::DoNotOptimize(recursive_H(ladder, gains));
}
BENCHMARK(BM_RecursiveH);

void BM_SimulateTrials(benchmark::State& state) {
  const auto s = make_reference_setup(1, 8, 2, 100);
  const auto p = prepare_problem(s.model, s.objective, s.attackers,
                                 assign_measures(enumerate_typical(100, 35, 2), NoInfiltrationMass{0.7}));
  SimulationOptions so;
  so.trials = 100;
  const auto gains = baseline_design(BaselineKind::Classical, s.model);
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_closed_loop(gains, p.set.scenarios[3], p.operators[3], p.bank, p.ladder, so));
  state.SetItemsProcessed(state.iterations() * so.trials);
}
BENCHMARK(BM_SimulateTrials)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
