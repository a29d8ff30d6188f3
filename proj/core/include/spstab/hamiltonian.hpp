#pragma once

#include <span>
#include <vector>

#include "spstab/casimir.hpp"
#include "spstab/grid.hpp"

namespace spstab {

/// H_V = -Delta_h + V as a symmetric tridiagonal matrix: diagonal
/// 2/h^2 + V_j, off-diagonal -1/h^2.
class Hamiltonian {
 public:
  Hamiltonian(Grid grid, RealField potential);

  const Grid& grid() const noexcept { return grid_; }
  const RealField& potential() const noexcept { return potential_; }
  double potential_min() const noexcept { return v_min_; }

  std::vector<double> diagonal() const;
  double off_diagonal() const noexcept { return -1.0 / (grid_.spacing() * grid_.spacing()); }

  RealField apply(std::span<const double> u) const;
  ComplexField apply(std::span<const Complex> u) const;

 private:
  Grid grid_;
  RealField potential_;
  double v_min_;
};

/// Lowest K eigenpairs of a Hamiltonian.
///
/// Eigenfields are h-orthonormal and real; each is signed so that its first
/// significant component is positive.
struct SpectralData {
  Grid grid;
  int K = 0;
  std::vector<double> mu;          // ascending
  std::vector<RealField> psi;      // psi[k] pairs with mu[k]
  std::vector<double> residuals;   // ||H psi_k - mu_k psi_k||_2
  double potential_min = 0.0;      // lower bound on V, used for tail estimates
  double orthonormality_error = 0.0;
  double tail_bound = 0.0;         // filled in by callers that sum an eos over the spectrum
};

/// min(N, 48)
int default_truncation(const Grid& grid);

/// Throws NumericalError when LAPACK fails, a residual or orthonormality
/// invariant is violated, or two eigenvalues coincide.
SpectralData eigensolve(const Hamiltonian& hamiltonian, int K);

struct SpectralSum {
  double value = 0.0;
  double tail_bound = 0.0;  // rigorous upper bound on the neglected terms
};

/// sum_{k<=K} F(mu_k + sigma) plus a bound on sum_{k>K}, obtained from the
/// free spectrum shifted by min V (eigenvalues only increase with V). Never
/// throws on truncation.
SpectralSum spectral_sum_F(const SpectralData& spectrum, double sigma, const EquationOfState& eos);
SpectralSum spectral_sum_f(const SpectralData& spectrum, double sigma, const EquationOfState& eos);

/// Tr F(H + sigma); throws TruncationError if the tail bound exceeds
/// rel_tol times the partial sum.
double trace_F(const SpectralData& spectrum, double sigma, const EquationOfState& eos,
               double rel_tol = 1e-8);
/// Tr f(H + sigma); same truncation contract.
double trace_f(const SpectralData& spectrum, double sigma, const EquationOfState& eos,
               double rel_tol = 1e-8);

}  // namespace spstab
