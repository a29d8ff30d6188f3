#include "spstab/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>

#include "spstab/error.hpp"
#include "spstab/stability.hpp"

namespace spstab {

namespace {

std::string fmt(const char* label, double value) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s=%.3e", label, value);
  return buf;
}

CheckResult run(const std::string& name, const std::function<CheckResult()>& body) {
  try {
    CheckResult r = body();
    r.name = name;
    return r;
  } catch (const std::exception& e) {
    return {name, false, e.what()};
  }
}

}  // namespace

std::vector<CheckResult> run_selfcheck(const RunConfig& config) {
  config.validate();
  const Grid grid = config.make_grid();
  const EquationOfState eos(config.eos_params());
  const int K = std::min(config.solver.K, grid.size());
  std::vector<CheckResult> out;

  out.push_back(run("free spectrum", [&] {
    const SpectralData s = eigensolve(Hamiltonian(grid, RealField(grid.size(), 0.0)), K);
    double worst = 0.0;
    for (int k = 0; k < K; ++k) {
      const double exact = grid.free_eigenvalue(k + 1);
      worst = std::max(worst, std::abs(s.mu[k] - exact) / exact);
    }
    return CheckResult{"", worst <= 1e-10, fmt("max_rel_err", worst)};
  }));

  out.push_back(run("poisson summation by parts", [&] {
    std::mt19937_64 rng(config.perturb.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RealField n(grid.size());
    for (double& v : n) v = u(rng);
    const RealField V = poisson_solve(grid, n);
    const double a = inner(grid, n, V);
    const double b = grad_norm_sq(grid, V);
    const double err = std::abs(a - b) / std::max(1.0, std::abs(a));
    const bool positive = *std::min_element(V.begin(), V.end()) >= 0.0;
    return CheckResult{"", err <= 1e-10 && positive, fmt("rel_err", err)};
  }));

  out.push_back(run("casimir class", [&] {
    const CasimirClassReport r = validate_casimir_class(eos);
    return CheckResult{"", r.pass(), r.detail.empty() ? eos.describe() : r.detail};
  }));

  out.push_back(run("conjugacy inequality", [&] {
    std::mt19937_64 rng(config.perturb.seed + 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = std::numeric_limits<double>::infinity();
    double equality = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double mu = -5.0 + 15.0 * u(rng);
      const double lambda = std::exp(-20.0 + 25.0 * u(rng));
      worst = std::min(worst, eos.F_star(-lambda) + lambda * mu + eos.F(mu));
      const double fm = eos.f(mu);
      if (fm > 0.0) {
        equality = std::max(equality, std::abs(eos.F_star(-fm) + fm * mu + eos.F(mu)));
      }
    }
    return CheckResult{"", worst >= -1e-10 && equality <= 1e-8,
                       fmt("min_gap", worst) + " " + fmt("max_equality_gap", equality)};
  }));

  std::unique_ptr<SteadyState> steady;
  out.push_back(run("steady solve and duality", [&] {
    steady = std::make_unique<SteadyState>(
        solve_steady(eos, config.solver.Lambda, grid, config.solver_options()));
    const auto& c = steady->certificates;
    const double gap = std::abs(c.phi_value - c.hc_value);
    bool monotone = true;
    for (std::size_t i = 1; i < steady->phi_history.size(); ++i) {
      if (steady->phi_history[i] < steady->phi_history[i - 1] - steady->phi_tolerance) {
        monotone = false;
      }
    }
    const bool ok = c.poisson_residual_inf < 1e-8 && c.charge_residual < 1e-10 && gap <= 1e-8 &&
                    monotone;
    return CheckResult{"", ok,
                       fmt("poisson", c.poisson_residual_inf) + " " +
                           fmt("charge", c.charge_residual) + " " + fmt("duality_gap", gap)};
  }));

  if (steady) {
    out.push_back(run("trace inequality equality case", [&] {
      EnsembleState state = to_ensemble(*steady);
      for (int k = 0; k < state.size(); ++k) state.lambda[k] = eos.f(steady->spectral.mu[k]);
      const TraceInequality t =
          trace_inequality_check(state, steady->V0, eos, grid, steady->spectral.K);
      return CheckResult{"", std::abs(t.margin) <= 1e-8, fmt("margin", t.margin)};
    }));

    out.push_back(run("jensen at eigenstates", [&] {
      double worst = 0.0;
      for (int k = 0; k < std::min(4, steady->spectral.K); ++k) {
        ComplexField psi(steady->spectral.psi[k].begin(), steady->spectral.psi[k].end());
        const JensenCheck j = jensen_check(psi, steady->V0, eos, grid, steady->spectral.K);
        worst = std::max(worst, std::abs(j.rhs - j.lhs));
      }
      return CheckResult{"", worst <= 1e-8, fmt("max_gap", worst)};
    }));

    out.push_back(run("short stationarity run", [&] {
      EvolveOptions options = config.evolve_options();
      options.T = std::min(options.T, 50 * options.dt);
      options.sample_every = 10;
      const EvolutionTrace trace =
          evolve(steady_ensemble(*steady), grid, eos, options, steady.get());
      double dn = 0.0, mass = 0.0;
      for (const auto& s : trace.samples) {
        dn = std::max(dn, s.density_dev);
        mass = std::max(mass, s.mass_dev);
      }
      const bool ok = dn <= 1e-6 && mass <= 1e-10 && trace.max_step_mass_change <= 1e-12 &&
                      !trace.orthonormality_flag;
      return CheckResult{"", ok, fmt("density_dev", dn) + " " + fmt("mass_dev", mass)};
    }));
  }
  return out;
}

}  // namespace spstab
