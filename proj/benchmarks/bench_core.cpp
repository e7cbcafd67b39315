#include <benchmark/benchmark.h>

#include "mgcool/dynamics.hpp"
#include "mgcool/hilbert.hpp"
#include "mgcool/model.hpp"
#include "mgcool/rates.hpp"

using namespace mgcool;

namespace {

model::SystemParams params(int n_max) {
  model::SystemParams p;
  p.set_gamma(5.0);
  p.omega = 2.8;
  p.delta = rates::resonance_detuning(p.omega);
  p.eta = p.eta_eff = 0.1;
  p.order = model::ExpansionOrder::second;
  p.n_max = n_max;
  return p;
}

void BM_Liouvillian(benchmark::State& state) {
  const auto m = model::build_model(params(static_cast<int>(state.range(0))), model::Picture::original);
  const Matrix rho =
      model::initial_state(m.layout, model::default_internal_state(), {2.0}, model::PhononState::thermal);
  for (auto _ : state) benchmark::DoNotOptimize(dynamics::apply_liouvillian(m, rho));
}
BENCHMARK(BM_Liouvillian)->Arg(10)->Arg(20)->Arg(40);

void BM_Expm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto f = hilbert::fock_ops(hilbert::FockSpace(n));
  const Matrix g = Complex(0.0, 0.3) * (f.a + f.a_dag);
  for (auto _ : state) benchmark::DoNotOptimize(hilbert::expm(g));
}
BENCHMARK(BM_Expm)->Arg(20)->Arg(60);

void BM_Kron(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix a = Matrix::Random(3, 3), b = Matrix::Random(n + 1, n + 1);
  for (auto _ : state) benchmark::DoNotOptimize(hilbert::kron({a, b}));
}
BENCHMARK(BM_Kron)->Arg(20)->Arg(60);

void BM_SteadyState(benchmark::State& state) {
  const auto m = model::build_model(params(static_cast<int>(state.range(0))), model::Picture::original);
  for (auto _ : state) benchmark::DoNotOptimize(dynamics::steady_state(m));
}
BENCHMARK(BM_SteadyState)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
