#pragma once

#include <vector>

#include "spstab/casimir.hpp"
#include "spstab/grid.hpp"

namespace spstab {

/// Finitely many tracked orthonormal states psi_k with occupations
/// lambda_k >= 0; untracked states carry zero occupation.
struct EnsembleState {
  std::vector<ComplexField> psi;
  std::vector<double> lambda;
  double t = 0.0;

  int size() const noexcept { return static_cast<int>(psi.size()); }
};

/// Throws DomainError on shape mismatches or negative occupations.
void validate(const EnsembleState& state, const Grid& grid);

/// n = sum_k lambda_k |psi_k|^2
RealField density(const EnsembleState& state, const Grid& grid);
/// Coulomb potential of the density with Dirichlet data.
RealField potential(const EnsembleState& state, const Grid& grid);

/// sum_k lambda_k ||grad psi_k||^2
double kinetic_energy(const EnsembleState& state, const Grid& grid);
/// H = sum_k lambda_k ||grad psi_k||^2 + 1/2 ||grad V||^2
double energy(const EnsembleState& state, const Grid& grid);
/// H_C = sum_k F*(-lambda_k) + H
double energy_casimir(const EnsembleState& state, const Grid& grid, const EquationOfState& eos);

double total_charge(const EnsembleState& state);
/// max_k | ||psi_k||^2 - 1 |
double mass_deviation(const EnsembleState& state, const Grid& grid);
/// max_{i,j} |<psi_i, psi_j> - delta_ij|
double orthonormality_error(const EnsembleState& state, const Grid& grid);

}  // namespace spstab
