#include <benchmark/benchmark.h>

#include "qgd/descent.hpp"
#include "qgd/generate.hpp"
#include "qgd/store.hpp"
#include "qgd/sve.hpp"

using namespace qgd;

static void BM_StoreInsert(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(0);
  std::uniform_int_distribution<std::size_t> idx(1, n);
  std::normal_distribution<double> g;
  MatrixStore store(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(store.insert({idx(rng), idx(rng), g(rng)}));
  state.counters["max_touches"] = static_cast<double>(store.max_touches());
}
BENCHMARK(BM_StoreInsert)->RangeMultiplier(4)->Range(16, 4096);

static void BM_SveAnalytic(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  GenParams gp;
  gp.n = n;
  const Matrix a = generate(Family::random_psd, gp, rng);
  const WalkOperator walk = build_walk(StorePair::from_matrix(a, 0.5));
  const Vector x = Vector::Ones(static_cast<Eigen::Index>(n)).normalized();
  for (auto _ : state) benchmark::DoNotOptimize(sve(walk, x, {0.01}, rng));
}
BENCHMARK(BM_SveAnalytic)->RangeMultiplier(2)->Range(4, 64);

static void BM_HistoryBuild(benchmark::State& state) {
  Rng rng(2);
  GenParams gp;
  gp.n = 8;
  gp.kappa = 2;
  const Matrix a = generate(Family::random_psd, gp, rng);
  const Vector b = Vector::Ones(8).normalized();
  const GdProblem problem(a, b);
  GDConfig cfg;
  cfg.alpha = 0.5;
  cfg.tau = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_history(problem, b, cfg, rng));
}
BENCHMARK(BM_HistoryBuild)->Arg(15)->Arg(63)->Arg(255)->Arg(1023);
BENCHMARK_MAIN();
