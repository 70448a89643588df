#include <benchmark/benchmark.h>

#include <vector>

#include "nla/amplifiers.hpp"
#include "nla/homodyne.hpp"
#include "nla/physical_model.hpp"
#include "nla/tomography.hpp"
#include "nla/wigner.hpp"

namespace {

nla::DensityMatrix amplified_state(double alpha, int n_max) {
  const nla::FockCutoff cut(n_max);
  return nla::DensityMatrix::from_pure(nla::amplify_ideal(nla::coherent_state(alpha, cut), 2.0).state.normalized());
}

void BM_AmplifyIdeal(benchmark::State& state) {
  const nla::FockCutoff cut(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nla::amplify_ideal(nla::coherent_state(0.65, cut), 2.0));
  }
}
BENCHMARK(BM_AmplifyIdeal)->Arg(20)->Arg(40)->Arg(80);

void BM_PhysicalAmplifier(benchmark::State& state) {
  const nla::FockCutoff cut(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nla::physical_amplifier(0.65, 0.05, 0.05, cut));
  }
}
BENCHMARK(BM_PhysicalAmplifier)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_LossChannel(benchmark::State& state) {
  const nla::DensityMatrix rho = amplified_state(0.65, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nla::loss_channel(rho, 0.6));
  }
}
BENCHMARK(BM_LossChannel)->Arg(20)->Arg(40);

void BM_SampleQuadratures(benchmark::State& state) {
  const nla::DensityMatrix rho = amplified_state(0.65, 20);
  const std::vector<double> phases = nla::phase_grid(11);
  const int per_phase = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nla::sample_quadratures(rho, phases, per_phase, 0.6, 1));
  }
  state.SetItemsProcessed(state.iterations() * per_phase * 11);
}
BENCHMARK(BM_SampleQuadratures)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_MaxLikIterations(benchmark::State& state) {
  const nla::DensityMatrix rho = amplified_state(0.65, 20);
  const std::vector<double> phases = nla::phase_grid(11);
  const nla::QuadratureDataset data = nla::sample_quadratures(rho, phases, 1000, 0.6, 2);
  nla::TomographySettings settings;
  settings.eta = 0.6;
  settings.max_iters = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nla::maxlik_reconstruct(data, settings));
  }
}
BENCHMARK(BM_MaxLikIterations)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_WignerGrid(benchmark::State& state) {
  const nla::DensityMatrix rho = amplified_state(0.65, static_cast<int>(state.range(0)));
  const std::vector<double> axis = nla::uniform_grid(-10.0, 10.0, 0.08);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nla::wigner_function(rho, axis, axis));
  }
}
BENCHMARK(BM_WignerGrid)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
