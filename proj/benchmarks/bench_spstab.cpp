#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "spstab/casimir.hpp"
#include "spstab/evolution.hpp"
#include "spstab/grid.hpp"
#include "spstab/hamiltonian.hpp"
#include "spstab/steady_state.hpp"

using namespace spstab;

namespace {

RealField smooth_potential(const Grid& grid) {
  return sample(grid, [&](double x) {
    const double d = (x - 0.4 * grid.length()) / (0.1 * grid.length());
    return 3.0 * std::exp(-d * d);
  });
}

const SteadyState& boltzmann_steady() {
  static const SteadyState s = [] {
    SolverOptions o;
    o.K = 24;
    return solve_steady(EquationOfState::boltzmann(1.0), 1.0, Grid(8.0, 256), o);
  }();
  return s;
}

}  // namespace

static void BM_Eigensolve(benchmark::State& state) {
  const Grid g(8.0, static_cast<int>(state.range(0)));
  const Hamiltonian h(g, smooth_potential(g));
  for (auto _ : state) benchmark::DoNotOptimize(eigensolve(h, 24));
}
BENCHMARK(BM_Eigensolve)->Arg(128)->Arg(256)->Arg(1024);

static void BM_PoissonSolve(benchmark::State& state) {
  const Grid g(8.0, static_cast<int>(state.range(0)));
  const RealField n = smooth_potential(g);
  for (auto _ : state) benchmark::DoNotOptimize(poisson_solve(g, n));
}
BENCHMARK(BM_PoissonSolve)->Arg(256)->Arg(4096);

static void BM_FermiDiracF(benchmark::State& state) {
  const auto eos = EquationOfState::fermi_dirac(1.0, 1.0);
  double s = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eos.f(s));
    s = s > 8.0 ? -3.0 : s + 0.37;
  }
}
BENCHMARK(BM_FermiDiracF);

static void BM_FermiDiracConjugate(benchmark::State& state) {
  const auto eos = EquationOfState::fermi_dirac(1.0, 1.0);
  eos.F_star(-1.0);  // build the table outside the timed loop
  double x = -20.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eos.F_star(-std::exp(x)));
    x = x > 5.0 ? -20.0 : x + 0.73;
  }
}
BENCHMARK(BM_FermiDiracConjugate);

static void BM_FermiDiracTable(benchmark::State& state) {
  for (auto _ : state) {
    const auto eos = EquationOfState::fermi_dirac(1.0, 1.0);
    benchmark::DoNotOptimize(eos.F_star(-1.0));
  }
}
BENCHMARK(BM_FermiDiracTable)->Unit(benchmark::kMillisecond);

static void BM_CrankNicolsonStep(benchmark::State& state) {
  const SteadyState& s = boltzmann_steady();
  EnsembleState e = perturb(s, PerturbKind::mix, 0.1, 1);
  for (auto _ : state) {
    e = step(e, 1e-3, s.grid);
    benchmark::DoNotOptimize(e.psi.data());
  }
  state.counters["modes"] = e.size();
}
BENCHMARK(BM_CrankNicolsonStep)->Unit(benchmark::kMicrosecond);

static void BM_SteadySolve(benchmark::State& state) {
  const auto eos = EquationOfState::boltzmann(1.0);
  const Grid g(8.0, static_cast<int>(state.range(0)));
  SolverOptions o;
  o.K = 24;
  o.method = state.range(1) == 0 ? SolverMethod::scf : SolverMethod::ascent;
  for (auto _ : state) benchmark::DoNotOptimize(solve_steady(eos, 1.0, g, o));
}
BENCHMARK(BM_SteadySolve)->Args({128, 0})->Args({256, 0})->Args({256, 1})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
