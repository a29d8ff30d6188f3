#include "spstab/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "spstab/error.hpp"

namespace spstab {

void validate(const EnsembleState& state, const Grid& grid) {
  if (state.psi.size() != state.lambda.size()) {
    throw DomainError("ensemble: psi and lambda have different lengths");
  }
  for (const auto& p : state.psi) {
    if (p.size() != static_cast<std::size_t>(grid.size())) {
      throw DomainError("ensemble: state length does not match grid");
    }
  }
  for (double l : state.lambda) {
    if (!(l >= 0.0)) throw DomainError("ensemble: negative occupation");
  }
}

RealField density(const EnsembleState& state, const Grid& grid) {
  validate(state, grid);
  RealField n(grid.size(), 0.0);
  for (int k = 0; k < state.size(); ++k) {
    const double l = state.lambda[k];
    if (l == 0.0) continue;
    for (int j = 0; j < grid.size(); ++j) n[j] += l * std::norm(state.psi[k][j]);
  }
  return n;
}

RealField potential(const EnsembleState& state, const Grid& grid) {
  return poisson_solve(grid, density(state, grid));
}

double kinetic_energy(const EnsembleState& state, const Grid& grid) {
  validate(state, grid);
  double sum = 0.0;
  for (int k = 0; k < state.size(); ++k) {
    if (state.lambda[k] != 0.0) sum += state.lambda[k] * grad_norm_sq(grid, state.psi[k]);
  }
  return sum;
}

double energy(const EnsembleState& state, const Grid& grid) {
  const RealField v = potential(state, grid);
  return kinetic_energy(state, grid) + 0.5 * grad_norm_sq(grid, v);
}

double energy_casimir(const EnsembleState& state, const Grid& grid, const EquationOfState& eos) {
  validate(state, grid);
  return casimir_sum(eos, state.lambda) + energy(state, grid);
}

double total_charge(const EnsembleState& state) {
  double sum = 0.0;
  for (double l : state.lambda) sum += l;
  return sum;
}

double mass_deviation(const EnsembleState& state, const Grid& grid) {
  double dev = 0.0;
  for (const auto& p : state.psi) dev = std::max(dev, std::abs(inner(grid, p, p).real() - 1.0));
  return dev;
}

double orthonormality_error(const EnsembleState& state, const Grid& grid) {
  double dev = 0.0;
  for (int i = 0; i < state.size(); ++i) {
    for (int j = i; j < state.size(); ++j) {
      const Complex g = inner(grid, state.psi[i], state.psi[j]);
      dev = std::max(dev, std::abs(g - Complex(i == j ? 1.0 : 0.0)));
    }
  }
  return dev;
}

}  // namespace spstab
