#include <benchmark/benchmark.h>

#include "densfact/density.hpp"
#include "densfact/ell1fact.hpp"
#include "densfact/extraction.hpp"
#include "densfact/kashin.hpp"
#include "densfact/rankreduce.hpp"
#include "densfact/rng.hpp"

using namespace densfact;

namespace {

LinOp gaussian(Index atoms, Index dim, std::uint64_t seed = 1) {
  Rng rng(seed);
  return LinOp::into_lp(NormedSpace::cross_polytope(dim), MeasureSpace::uniform_probability(static_cast<std::size_t>(atoms)),
                        rng.normal_matrix(atoms, dim));
}

void BM_C1q(benchmark::State& state) {
  const LinOp t = gaussian(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(c1q(t, 3.0, 1e-9).upper);
}
BENCHMARK(BM_C1q)->Args({8, 2})->Args({8, 4})->Args({32, 4})->Args({64, 6})->Unit(benchmark::kMillisecond);

void BM_C1inf(benchmark::State& state) {
  const LinOp t = gaussian(state.range(0), 4);
  for (auto _ : state) benchmark::DoNotOptimize(c1inf(t));
}
BENCHMARK(BM_C1inf)->Arg(8)->Arg(64)->Arg(512);

void BM_RosenthalIdentity(benchmark::State& state) {
  const Index d = state.range(0);
  const LinOp t = LinOp::into_lp(NormedSpace::cross_polytope(d), MeasureSpace::uniform_probability(static_cast<std::size_t>(d)),
                                 static_cast<double>(d) * Matrix::Identity(d, d));
  for (auto _ : state) benchmark::DoNotOptimize(rosenthal_extract(t, 2.0, 4.0).m());
}
BENCHMARK(BM_RosenthalIdentity)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Theorem8(benchmark::State& state) {
  const LinOp t = gaussian(state.range(0), 3);
  for (auto _ : state) benchmark::DoNotOptimize(theorem8_pipeline(t, 1.5, 3.0).fact.witness.k);
}
BENCHMARK(BM_Theorem8)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_EpsilonNet(benchmark::State& state) {
  const NormedSpace space = NormedSpace::euclidean(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(epsilon_net(space, 0.5).pairs());
}
BENCHMARK(BM_EpsilonNet)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_L1RankReduction(benchmark::State& state) {
  Rng rng(3);
  const Matrix u = rng.normal_matrix(state.range(0), 6);
  const MeasureSpace mu = MeasureSpace::uniform_probability(6);
  for (auto _ : state) benchmark::DoNotOptimize(l1_rank_reduction(u, mu, 0.5).rank);
}
BENCHMARK(BM_L1RankReduction)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_KashinPair(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(random_kashin_pair(n, 7, 32).b_hat);
}
BENCHMARK(BM_KashinPair)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
