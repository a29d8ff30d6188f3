#pragma once

#include <vector>

#include "spstab/casimir.hpp"
#include "spstab/ensemble.hpp"
#include "spstab/grid.hpp"
#include "spstab/hamiltonian.hpp"

namespace spstab {

/// A point (V, sigma) of the dual problem; V must be nonnegative.
struct DualPoint {
  RealField V;
  double sigma = 0.0;
};

/// Rejects potentials below -1e-12 anywhere.
void validate(const DualPoint& point, const Grid& grid);

/// Phi(V, sigma) = -1/2 ||grad V||^2 - Tr F(-Delta + V + sigma) - sigma * Lambda
double phi_eval(const DualPoint& point, const EquationOfState& eos, double Lambda,
                const Grid& grid, int K);

struct DualGradient {
  RealField field;  // Delta V + sum_k f(mu_k + sigma) |psi_k|^2, L^2_h gradient in V
  double sigma = 0.0;  // Tr f(H_V + sigma) - Lambda
};

DualGradient phi_gradient(const DualPoint& point, const EquationOfState& eos, double Lambda,
                          const Grid& grid, int K);

/// The sigma with Tr f(H + sigma) = Lambda, by bisection.
///
/// Throws InfeasibleError when the modes beyond K would carry a
/// non-negligible part of the charge at the solution.
double solve_fermi_level(const SpectralData& spectrum, const EquationOfState& eos,
                         double Lambda, double truncation_tol = 1e-8);
double solve_fermi_level(const Hamiltonian& hamiltonian, const EquationOfState& eos,
                         double Lambda, int K);

enum class SolverMethod { scf, ascent };

struct SolverOptions {
  int K = 0;  // 0 selects default_truncation(grid)
  double tol_V = 1e-8;
  double tol_lambda = 1e-10;
  int max_iter = 500;
  double damping = 0.5;
  SolverMethod method = SolverMethod::scf;
  double truncation_tol = 1e-8;
  RealField initial_V;  // empty means V = 0
};

struct SteadyCertificates {
  double poisson_residual_inf = 0.0;  // ||(-Delta_h) V0 - n0||_inf
  double charge_residual = 0.0;       // |sum lambda - Lambda|
  double phi_value = 0.0;             // Phi(V0, sigma0)
  double hc_value = 0.0;              // H_C(psi0, lambda0)
};

struct SteadyState {
  Grid grid;
  EosParams eos;
  double Lambda = 0.0;
  RealField V0;
  double sigma0 = 0.0;
  SpectralData spectral;         // mu_0 and psi_0
  std::vector<double> lambda0;   // f(mu_0k + sigma0)
  SteadyCertificates certificates;
  std::vector<double> phi_history;       // Phi at every accepted iterate
  std::vector<double> residual_history;  // Poisson residual at every accepted iterate
  int iterations = 0;
  // Phi decreases smaller than this count as evaluation noise when
  // accepting iterates.
  double phi_tolerance = 0.0;
};

/// Maximizes Phi over (V, sigma).
///
/// The default method is a damped self-consistent-field loop: eigensolve,
/// Fermi level, density, Poisson solve, then V <- (1 - a) V + a V+. The
/// damping a is halved whenever Phi would decrease, so Phi is nondecreasing
/// along accepted iterates. The "ascent" method keeps sigma at its optimum for
/// the current V and steps V along the H^1-preconditioned gradient with an
/// Armijo backtracking line search.
///
/// Throws ConvergenceError (with the residual history) when max_iter is
/// exhausted and InfeasibleError when Lambda needs more than K modes.
SteadyState solve_steady(const EquationOfState& eos, double Lambda, const Grid& grid,
                         const SolverOptions& options = {});

/// The first `count` steady modes as an ensemble (count < 0: all K).
EnsembleState to_ensemble(const SteadyState& steady, int count = -1);

/// Density n0 = sum lambda_0k |psi_0k|^2 over all K modes.
RealField steady_density(const SteadyState& steady);

}  // namespace spstab
