// Likelihood kernel: serial reference vs production (serial and OpenMP), plus
// end-to-end fits. Instances are simulated from the default design.

#include <benchmark/benchmark.h>

#include <map>

#include "cpm/simulate.hpp"
#include "cpm/solver.hpp"

namespace {

struct Instance {
  cpm::OrdinalEncoding enc;
  cpm::Parameters params;
};

const Instance& instance(int n) {
  static std::map<int, Instance> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  cpm::SimDesign d;
  d.n = n;
  Instance inst;
  inst.enc = cpm::encode_ordinal(cpm::make_uncensored(cpm::generate_replicate(d, 0)));
  inst.params = cpm::fit(inst.enc, cpm::LinkFamily(cpm::LinkKind::probit)).params;
  return cache.emplace(n, std::move(inst)).first->second;
}

void BM_reference(benchmark::State& state) {
  const auto& inst = instance(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(cpm::reference::evaluate(inst.enc, inst.params, cpm::LinkFamily(cpm::LinkKind::probit)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void run_kernel(benchmark::State& state, cpm::Execution exec) {
  const auto& inst = instance(static_cast<int>(state.range(0)));
  cpm::LikelihoodWorkspace ws;
  for (auto _ : state)
    benchmark::DoNotOptimize(cpm::try_evaluate(inst.enc, inst.params, cpm::LinkFamily(cpm::LinkKind::probit),
                                               cpm::EvalLevel::hessian, &ws, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_kernel_serial(benchmark::State& state) { run_kernel(state, cpm::Execution::serial); }
void BM_kernel_parallel(benchmark::State& state) { run_kernel(state, cpm::Execution::parallel); }

void BM_fit(benchmark::State& state) {
  const auto& inst = instance(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cpm::fit(inst.enc, cpm::LinkFamily(cpm::LinkKind::probit)));
}

}  // namespace

BENCHMARK(BM_reference)->RangeMultiplier(4)->Range(1 << 12, 1 << 18)->UseRealTime();
BENCHMARK(BM_kernel_serial)->RangeMultiplier(4)->Range(1 << 12, 1 << 18)->UseRealTime();
BENCHMARK(BM_kernel_parallel)->RangeMultiplier(4)->Range(1 << 12, 1 << 18)->UseRealTime();
BENCHMARK(BM_fit)->Arg(1000)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
