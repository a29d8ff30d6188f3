#include "doctest.h"
#include "support.hpp"

#include <cmath>
#include <numbers>

#include "spstab/error.hpp"
#include "spstab/evolution.hpp"

using namespace spstab;

namespace {

const SteadyState& boltzmann_steady() {
  static const SteadyState s = [] {
    SolverOptions o;
    o.K = 24;
    return solve_steady(EquationOfState::boltzmann(1.0), 1.0, Grid(8.0, 128), o);
  }();
  return s;
}

double max_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

}  // namespace

TEST_CASE("density, potential and energy of simple ensembles") {
  const Grid g(8.0, 100);
  std::mt19937_64 rng(1);
  EnsembleState empty{{testing::random_complex_field(100, rng)}, {0.0}, 0.0};
  for (double v : density(empty, g)) CHECK(v == 0.0);
  for (double v : potential(empty, g)) CHECK(v == 0.0);
  CHECK(energy(empty, g) == 0.0);
  const auto b = EquationOfState::boltzmann(1.0);
  CHECK(energy_casimir(empty, g, b) == 0.0);

  EnsembleState one{{testing::normalized(g, testing::random_complex_field(100, rng))}, {1.0}, 0.0};
  const RealField n = density(one, g);
  double mass = 0.0;
  for (double v : n) mass += g.spacing() * v;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : n) CHECK(v >= 0.0);
  const RealField V = potential(one, g);
  for (double v : V) CHECK(v >= 0.0);
  // int n V = int |grad V|^2
  CHECK(inner(g, n, V) == doctest::Approx(grad_norm_sq(g, V)).epsilon(1e-10));

  EnsembleState bad = one;
  bad.lambda[0] = -0.1;
  CHECK_THROWS_AS(validate(bad, g), DomainError);
  CHECK_THROWS_AS(energy_casimir(bad, g, b), DomainError);
  EnsembleState short_state{{ComplexField(50)}, {1.0}, 0.0};
  CHECK_THROWS_AS(density(short_state, g), DomainError);
}

TEST_CASE("weak coupling energy of a free eigenstate") {
  const Grid g(8.0, 100);
  const SpectralData s = eigensolve(Hamiltonian(g, RealField(100, 0.0)), 3);
  for (int k = 0; k < 3; ++k) {
    EnsembleState e{{ComplexField(s.psi[k].begin(), s.psi[k].end())}, {1e-8}, 0.0};
    CHECK(energy(e, g) / 1e-8 == doctest::Approx(s.mu[k]).epsilon(1e-7));
  }
}

TEST_CASE("energy-Casimir is invariant under global phases") {
  const SteadyState& s = boltzmann_steady();
  const auto b = EquationOfState::boltzmann(1.0);
  EnsembleState e = to_ensemble(s);
  const double before = energy_casimir(e, s.grid, b);
  for (int k = 0; k < e.size(); ++k) {
    const Complex phase = std::polar(1.0, 0.37 * (k + 1));
    for (auto& v : e.psi[k]) v *= phase;
  }
  CHECK(energy_casimir(e, s.grid, b) == doctest::Approx(before).epsilon(1e-14));
  CHECK(before == doctest::Approx(s.certificates.phi_value).epsilon(1e-10));
}

TEST_CASE("free eigenstate acquires a pure phase") {
  const Grid g(8.0, 100);
  const SpectralData s = eigensolve(Hamiltonian(g, RealField(100, 0.0)), 2);
  // lambda = 0 keeps V = 0, so CN maps the eigenvector to a pure phase
  EnsembleState e{{ComplexField(s.psi[0].begin(), s.psi[0].end())}, {0.0}, 0.0};
  const double dt = 1e-3;
  EnsembleState cur = e;
  for (int i = 0; i < 1000; ++i) cur = step(cur, dt, g);
  const double mu = s.mu[0];
  // Crank-Nicolson phase per step: (1 - i mu dt/2) / (1 + i mu dt/2)
  const double theta = -2.0 * std::atan(0.5 * mu * dt) * 1000;
  for (int j = 0; j < g.size(); ++j) {
    CHECK(std::abs(std::abs(cur.psi[0][j]) - std::abs(e.psi[0][j])) <= 1e-10);
    CHECK(std::abs(cur.psi[0][j] - std::polar(1.0, theta) * e.psi[0][j]) <= 1e-9);
  }
  // continuum phase e^{-i mu t} to second order in dt
  CHECK(std::abs(theta + mu * 1.0) <= mu * mu * mu * dt * dt);
  CHECK(cur.t == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single steps conserve mass and orthonormality; reversal recovers the state") {
  const SteadyState& s = boltzmann_steady();
  const Grid& g = s.grid;
  for (auto kind : {PerturbKind::phase, PerturbKind::mix}) {
    const EnsembleState e = perturb(s, kind, 0.3, 5);
    const EnsembleState next = step(e, 1e-3, g);
    for (int k = 0; k < e.size(); ++k) {
      const double before = inner(g, e.psi[k], e.psi[k]).real();
      const double after = inner(g, next.psi[k], next.psi[k]).real();
      CHECK(std::abs(after - before) <= 1e-12);
    }
    CHECK(orthonormality_error(next, g) <= orthonormality_error(e, g) + 1e-10);
    const EnsembleState back = step(next, -1e-3, g);
    double worst = 0.0;
    for (int k = 0; k < e.size(); ++k) worst = std::max(worst, max_diff(back.psi[k], e.psi[k]));
    CHECK(worst <= 1e-9);
    CHECK(back.t == doctest::Approx(0.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(step(to_ensemble(s), 0.0, g), DomainError);
  StepOptions bad;
  bad.midpoint_sweeps = -1;
  CHECK_THROWS_AS(step(to_ensemble(s), 1e-3, g, bad), DomainError);
}

TEST_CASE("perturbation generators") {
  const SteadyState& s = boltzmann_steady();
  const Grid& g = s.grid;
  const EnsembleState base = steady_ensemble(s);
  CHECK(base.size() == tracked_mode_count(s));
  CHECK(base.size() <= s.spectral.K);
  CHECK(base.lambda.back() == s.lambda0[base.size() - 1]);
  for (auto kind : {PerturbKind::none, PerturbKind::phase, PerturbKind::occupation, PerturbKind::mix}) {
    const EnsembleState e = perturb(s, kind, 0.0, 3);
    CHECK(e.psi == base.psi);
    CHECK(e.lambda == base.lambda);
  }
  CHECK_THROWS_AS(perturb(s, PerturbKind::phase, -0.1), DomainError);
  CHECK_THROWS_AS(parse_perturb_kind("shear"), DomainError);
  CHECK(parse_perturb_kind(to_string(PerturbKind::occupation)) == PerturbKind::occupation);

  const auto b = EquationOfState::boltzmann(1.0);
  const EnsembleState ph = perturb(s, PerturbKind::phase, 0.1);
  const RealField n0 = density(base, g), n1 = density(ph, g);
  for (int j = 0; j < g.size(); ++j) CHECK(std::abs(n0[j] - n1[j]) <= 1e-15 * (1.0 + n0[j]));
  CHECK(kinetic_energy(ph, g) > kinetic_energy(base, g));
  CHECK(orthonormality_error(ph, g) <= 1e-12);

  const EnsembleState mx = perturb(s, PerturbKind::mix, 0.1, 42);
  CHECK(total_charge(mx) == total_charge(base));
  CHECK(orthonormality_error(mx, g) <= 1e-12);
  CHECK(energy_casimir(mx, g, b) > energy_casimir(base, g, b));
  const EnsembleState mx2 = perturb(s, PerturbKind::mix, 0.1, 42);
  CHECK(mx2.psi == mx.psi);
  CHECK(perturb(s, PerturbKind::mix, 0.1, 43).psi != mx.psi);

  const EnsembleState oc = perturb(s, PerturbKind::occupation, 0.05, 7);
  CHECK(oc.psi == base.psi);
  for (int k = 0; k < oc.size(); ++k) {
    CHECK(oc.lambda[k] >= 0.0);
    CHECK(std::abs(oc.lambda[k] - base.lambda[k]) <= 0.05 * base.lambda[k] * (1.0 + 1e-15));
  }
  const EnsembleState huge = perturb(s, PerturbKind::occupation, 3.0, 7);
  for (double l : huge.lambda) CHECK(l >= 0.0);
}

TEST_CASE("stationarity of the steady ensemble") {
  const SteadyState& s = boltzmann_steady();
  const auto b = EquationOfState::boltzmann(1.0);
  EvolveOptions o;
  o.T = 1.0;
  o.sample_every = 50;
  const EvolutionTrace trace = evolve(steady_ensemble(s), s.grid, b, o, &s);
  CHECK(trace.samples.size() == 21);
  CHECK(trace.has_reference);
  for (const auto& x : trace.samples) {
    CHECK(x.density_dev <= 1e-6);
    CHECK(x.dist <= 1e-8);
    CHECK(x.mass_dev <= 1e-10);
    CHECK(x.orth_dev <= 1e-8);
  }
  CHECK_FALSE(trace.orthonormality_flag);
  CHECK(trace.max_step_mass_change <= 1e-12);
  for (std::size_t i = 1; i < trace.samples.size(); ++i) {
    CHECK(trace.samples[i].t > trace.samples[i - 1].t);
  }
  CHECK(trace.samples.back().t == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("energy drift is second order in dt") {
  const SteadyState& s = boltzmann_steady();
  const auto b = EquationOfState::boltzmann(1.0);
  const EnsembleState e = perturb(s, PerturbKind::mix, 0.1, 1);
  double drift[2];
  int i = 0;
  for (double dt : {2e-3, 1e-3}) {
    EvolveOptions o;
    o.dt = dt;
    o.T = 1.0;
    o.sample_every = static_cast<int>(std::lround(0.02 / dt));
    const EvolutionTrace trace = evolve(e, s.grid, b, o, &s);
    double d = 0.0;
    for (const auto& x : trace.samples) d = std::max(d, std::abs(x.HC - trace.samples[0].HC));
    drift[i++] = d;
  }
  CHECK(drift[0] / drift[1] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("evolve options, callbacks and reference checks") {
  const SteadyState& s = boltzmann_steady();
  const auto b = EquationOfState::boltzmann(1.0);
  EvolveOptions o;
  o.T = 0.05;
  o.sample_every = 20;
  int calls = 0;
  const EvolutionTrace trace = evolve(steady_ensemble(s), s.grid, b, o, nullptr,
                                      [&](const EnsembleState&, const RealField& V) {
                                        ++calls;
                                        CHECK(V.size() == 128);
                                      });
  CHECK(calls == 4);  // t = 0, 0.02, 0.04 and the final 0.05
  CHECK_FALSE(trace.has_reference);
  CHECK(trace.samples.back().dist == 0.0);
  o.dt = -1e-3;
  CHECK_THROWS_AS(evolve(steady_ensemble(s), s.grid, b, o), DomainError);
  o.dt = 1e-3;
  o.sample_every = 0;
  CHECK_THROWS_AS(evolve(steady_ensemble(s), s.grid, b, o), DomainError);
  o.sample_every = 1;
  const Grid other(8.0, 64);
  CHECK_THROWS_AS(evolve(steady_ensemble(s), other, b, o, &s), DomainError);
}
