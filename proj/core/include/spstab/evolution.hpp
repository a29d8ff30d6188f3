#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spstab/casimir.hpp"
#include "spstab/ensemble.hpp"
#include "spstab/grid.hpp"
#include "spstab/steady_state.hpp"

namespace spstab {

struct StepOptions {
  int midpoint_sweeps = 2;
};

/// One Crank-Nicolson step of i d/dt psi_k = (-Delta + V) psi_k with a
/// self-consistent midpoint potential.
///
/// Predictor: V_half is the potential of the state advanced by dt/2 under the
/// frozen current potential. Corrector: every state solves
/// (I + i dt/2 H_{V_half}) psi(t+dt) = (I - i dt/2 H_{V_half}) psi(t).
/// Each sweep recomputes V_half from the midpoint (psi(t) + psi(t+dt))/2 and
/// repeats the corrector. All states share one unitary, so norms and mutual
/// orthogonality are preserved up to round-off. Negative dt runs backwards.
EnsembleState step(const EnsembleState& state, double dt, const Grid& grid,
                   const StepOptions& options = {});

enum class PerturbKind { none, phase, occupation, mix };

std::string to_string(PerturbKind kind);
PerturbKind parse_perturb_kind(const std::string& name);

/// Number of steady modes to track: those with lambda > occupied_tol * Lambda,
/// plus `buffer` extra modes, capped at K.
int tracked_mode_count(const SteadyState& steady, int buffer = 4, double occupied_tol = 1e-13);

/// Steady ensemble restricted to the tracked modes.
EnsembleState steady_ensemble(const SteadyState& steady, int buffer = 4);

/// Perturbations that stay in the state space:
///  - phase:      psi_k <- exp(i eps g(x)) psi_k with g(x) = sin(2 pi x / L)
///  - occupation: lambda_k <- max(0, lambda_k (1 + eps r_k)), r_k ~ U[-1, 1]
///  - mix:        rows of psi mixed by the Cayley transform of eps * A, with
///                A a seeded random skew-Hermitian matrix
/// eps = 0 returns the steady ensemble unchanged.
EnsembleState perturb(const SteadyState& steady, PerturbKind kind, double eps,
                      std::uint64_t seed = 0, int buffer = 4);

struct TraceSample {
  double t = 0.0;
  double mass_dev = 0.0;     // max_k | ||psi_k||^2 - 1 |
  double H = 0.0;
  double HC = 0.0;
  double dist = 0.0;         // 1/2 ||grad V - grad V0||^2, 0 without a reference
  double charge = 0.0;       // sum lambda_k
  double density_dev = 0.0;  // ||n - n0||_inf, 0 without a reference
  double orth_dev = 0.0;     // max |<psi_i, psi_j> - delta_ij|
};

struct EvolutionTrace {
  double length = 0.0;
  int n_points = 0;
  std::string eos;           // EquationOfState::describe()
  bool has_reference = false;
  double dt = 0.0;
  double max_step_mass_change = 0.0;
  bool orthonormality_flag = false;  // drift exceeded the configured bound
  std::vector<TraceSample> samples;
};

struct EvolveOptions {
  double dt = 1e-3;
  double T = 10.0;
  int sample_every = 100;
  StepOptions step;
  double orthonormality_tol = 1e-8;
};

using SampleCallback = std::function<void(const EnsembleState&, const RealField& V)>;

/// Propagates to time T, sampling diagnostics every `sample_every` steps and
/// at the final time. With a reference steady state the samples also carry
/// the gradient distance to V0 and the density deviation from n0.
EvolutionTrace evolve(EnsembleState state, const Grid& grid, const EquationOfState& eos,
                      const EvolveOptions& options, const SteadyState* reference = nullptr,
                      const SampleCallback& on_sample = {});

}  // namespace spstab
