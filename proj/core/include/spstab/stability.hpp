#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "spstab/casimir.hpp"
#include "spstab/ensemble.hpp"
#include "spstab/evolution.hpp"
#include "spstab/hamiltonian.hpp"
#include "spstab/steady_state.hpp"

#include <Eigen/Core>

namespace spstab {

struct StabilityViolation {
  double t = 0.0;
  double excess = 0.0;  // d(t) - B - tol
};

/// Audit of 1/2 ||grad V(t) - grad V0||^2 <= H_C(initial) - H_C(steady).
///
/// The energy-Casimir functional is taken relative to the Fermi level sigma0
/// of the steady state, H_C + sigma0 * sum(lambda), which leaves B unchanged
/// when the total charge is preserved.
struct StabilityReport {
  double bound = 0.0;          // B
  double initial_hc = 0.0;     // shifted H_C at t = 0
  double steady_hc = 0.0;      // shifted H_C of the steady state
  double tolerance = 1e-6;
  double hc_drift = 0.0;       // max_t |H_C(t) - H_C(0)| along the trace
  double margin = 0.0;         // min_t (B - d(t))
  std::vector<double> times;
  std::vector<double> distances;
  std::vector<StabilityViolation> violations;

  bool pass() const { return violations.empty(); }
};

/// Throws DomainError when the trace was produced on another grid or eos,
/// carries no reference distances, or is empty.
StabilityReport stability_audit(const EvolutionTrace& trace, const SteadyState& steady,
                                const EquationOfState& eos, double tol = 1e-6);

struct TraceInequality {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
};

/// lhs = sum F*(-lambda_k) + sum lambda_k <psi_k, H_V psi_k>,
/// rhs = -Tr F(H_V) over the lowest K modes.
TraceInequality trace_inequality_check(const EnsembleState& state, const RealField& V,
                                       const EquationOfState& eos, const Grid& grid, int K);

struct JensenCheck {
  double lhs = 0.0;   // F(<psi, H_V psi>)
  double rhs = 0.0;   // <psi, F(H_V) psi>, including the tail bound
  double tail = 0.0;  // upper bound on the weight outside the lowest K modes times F(mu_K)
};

/// Throws DomainError if psi is not normalized to 1e-10.
JensenCheck jensen_check(const ComplexField& psi, const RealField& V, const EquationOfState& eos,
                         const Grid& grid, int K);

/// Haar-distributed K x K unitary (QR of a complex Gaussian matrix with the
/// phases of R's diagonal divided out).
Eigen::MatrixXcd random_unitary(int K, std::mt19937_64& rng);

/// Random ensemble: a random unitary applied to the K eigenfields of the
/// spectrum, occupations f(mu_k + shift) with random shifts and weights,
/// rescaled to a random total charge in [0.5, 2].
EnsembleState random_ensemble(const SpectralData& spectrum, const EquationOfState& eos,
                              std::mt19937_64& rng);

}  // namespace spstab
