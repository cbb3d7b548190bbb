#include <benchmark/benchmark.h>

#include "flocksim/measures.hpp"

using namespace flocksim;

namespace {

ParticleEnsemble cloud(int n, std::uint64_t seed) {
  ParticleEnsemble ens(n, 2);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 2; ++k) {
      ens.position(i)[static_cast<std::size_t>(k)] = normal01(seed, 1, static_cast<std::uint64_t>(2 * i + k));
      ens.velocity(i)[static_cast<std::size_t>(k)] = normal01(seed, 2, static_cast<std::uint64_t>(2 * i + k));
    }
  return ens;
}

}  // namespace

static void ExactAssignment(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = cloud(n, 3);
  const auto b = cloud(n, 4);
  for (auto _ : state) {
    const TransportResult r = wasserstein_exact(a, b, 2.0);
    benchmark::DoNotOptimize(r.distance);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(ExactAssignment)->RangeMultiplier(2)->Range(64, 512)->Complexity();

static void SlicedProjections(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = cloud(n, 5);
  const auto b = cloud(n, 6);
  for (auto _ : state) {
    const TransportResult r = wasserstein_sliced(a, b, 2.0, 64, 9);
    benchmark::DoNotOptimize(r.distance);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(SlicedProjections)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

static void KnnOracle(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto ens = cloud(n, 7);
  const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  for (auto _ : state) {
    const auto u = local_velocity_knn(ens, ens.position(0), k);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(KnnOracle)->RangeMultiplier(4)->Range(256, 16384);

BENCHMARK_MAIN();
