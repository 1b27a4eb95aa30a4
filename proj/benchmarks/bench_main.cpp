#include <benchmark/benchmark.h>

#include "rcmlab/extremes.hpp"
#include "rcmlab/paths.hpp"
#include "rcmlab/percolation.hpp"
#include "rcmlab/spectral.hpp"
#include "rcmlab/traps.hpp"

using namespace rcm;

namespace {

void BM_SampleEnvironment(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(Environment::sample({2, n, 5}, ConductanceLaw::polynomial(0.2), seed++));
  }
}
BENCHMARK(BM_SampleEnvironment)->Arg(16)->Arg(64);

void BM_PiField(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Environment env = Environment::sample({2, n, 5}, ConductanceLaw::polynomial(0.2), 1);
  for (auto _ : state) benchmark::DoNotOptimize(pi_field(env));
}
BENCHMARK(BM_PiField)->Arg(16)->Arg(64);

void BM_AssembleOperator(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Environment env = Environment::sample({2, n, 5}, ConductanceLaw::polynomial(0.2), 1);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_dirichlet_operator(env, n));
}
BENCHMARK(BM_AssembleOperator)->Arg(16)->Arg(64);

void BM_Matvec(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Environment env = Environment::sample({2, n, 5}, ConductanceLaw::polynomial(0.2), 1);
  const DirichletOperator op = assemble_dirichlet_operator(env, n);
  std::vector<double> x(static_cast<std::size_t>(op.dim()), 1.0), y(x.size());
  for (auto _ : state) {
    op.apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_Matvec)->Arg(16)->Arg(64);

void BM_PrincipalEigenpair(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    const Environment env = Environment::sample({2, n, 5}, ConductanceLaw::polynomial(0.1), seed++);
    benchmark::DoNotOptimize(principal_eigenpair(assemble_dirichlet_operator(env, n)));
  }
}
BENCHMARK(BM_PrincipalEigenpair)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Clusters(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ConductanceLaw law = ConductanceLaw::polynomial(1.0);
  const Environment env = Environment::sample({2, n, 5}, law, 1);
  const auto open = threshold_open(env, law.inverse_cdf(0.1));
  for (auto _ : state) benchmark::DoNotOptimize(clusters(env, open, n));
}
BENCHMARK(BM_Clusters)->Arg(64);

void BM_BadEdgeCensus(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Environment env = Environment::sample({2, n, 7}, ConductanceLaw::polynomial(0.2), 1);
  for (auto _ : state) benchmark::DoNotOptimize(bad_edge_census(env, n, 6, 1e-6));
}
BENCHMARK(BM_BadEdgeCensus)->Arg(64);

void BM_FPiTable(benchmark::State& state) {
  const TailModel model(ConductanceLaw::polynomial(0.5), 2);
  for (auto _ : state) benchmark::DoNotOptimize(model.F_pi_table(0.1, 1.6, 1u << 12));
}
BENCHMARK(BM_FPiTable);

}  // namespace

BENCHMARK_MAIN();
