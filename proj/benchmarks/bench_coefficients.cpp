#include <benchmark/benchmark.h>

#include "flocksim/coefficients.hpp"
#include "flocksim/integrator.hpp"

using namespace flocksim;

namespace {

KernelSpec mt_only_spec() {
  KernelSpec s;
  s.dim = 2;
  s.psi = ConstantKernel{0.0};
  s.psi_tilde = ConstantKernel{0.0};
  s.phi = BumpKernel{0.5, 1.0, 1.0};
  return s;
}

KernelSpec full_spec() {
  KernelSpec s = mt_only_spec();
  s.psi = RationalKernel{1.0, 1.0};
  s.psi_tilde = ConstantKernel{0.5};
  return s;
}

ParticleEnsemble cloud(int n) {
  SimConfig cfg;
  cfg.n = n;
  cfg.dim = 2;
  cfg.kernel = full_spec();
  cfg.init_seed = 17;
  return sample_initial(cfg);
}

}  // namespace

static void BundleBruteForce(benchmark::State& state) {
  const auto ens = cloud(static_cast<int>(state.range(0)));
  const KernelSpec spec = full_spec();
  const Truncation tr{50.0, 0.5};
  for (auto _ : state) {
    const CoefficientBundle b = eval_bundle(ens, spec, tr, nullptr);
    benchmark::DoNotOptimize(b.drift.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BundleBruteForce)->RangeMultiplier(4)->Range(64, 1024)->Complexity();

static void LocalAverageCellList(benchmark::State& state) {
  const auto ens = cloud(static_cast<int>(state.range(0)));
  const KernelSpec spec = mt_only_spec();
  const Truncation tr{50.0, 0.5};
  for (auto _ : state) {
    const CellIndex index(ens, spec.phi.r2);
    const CoefficientBundle b = eval_bundle(ens, spec, tr, &index);
    benchmark::DoNotOptimize(b.u.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(LocalAverageCellList)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

static void LocalAverageBruteForce(benchmark::State& state) {
  const auto ens = cloud(static_cast<int>(state.range(0)));
  const KernelSpec spec = mt_only_spec();
  const Truncation tr{50.0, 0.5};
  for (auto _ : state) {
    const CoefficientBundle b = eval_bundle(ens, spec, tr, nullptr);
    benchmark::DoNotOptimize(b.u.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(LocalAverageBruteForce)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

static void EulerStep(benchmark::State& state) {
  const auto ens = cloud(static_cast<int>(state.range(0)));
  const KernelSpec spec = full_spec();
  const Truncation tr{50.0, 0.5};
  for (auto _ : state) {
    const ParticleEnsemble out = step_ito_em(ens, spec, tr, 0.01, 0.01);
    benchmark::DoNotOptimize(out.vel.data());
  }
}
BENCHMARK(EulerStep)->RangeMultiplier(4)->Range(64, 1024);

BENCHMARK_MAIN();
