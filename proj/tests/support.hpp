#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "spstab/grid.hpp"

namespace testing {

inline spstab::RealField random_field(int n, std::mt19937_64& rng, double lo = -1.0,
                                      double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  spstab::RealField out(n);
  for (double& v : out) v = u(rng);
  return out;
}

inline spstab::ComplexField random_complex_field(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  spstab::ComplexField out(n);
  for (auto& v : out) v = {g(rng), g(rng)};
  return out;
}

// A smooth nonnegative potential: a few random Gaussian bumps.
inline spstab::RealField random_bumps(const spstab::Grid& grid, std::mt19937_64& rng,
                                      double amplitude = 2.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  spstab::RealField V(grid.size(), 0.0);
  for (int b = 0; b < 3; ++b) {
    const double centre = grid.length() * (0.15 + 0.7 * u(rng));
    const double width = grid.length() * (0.05 + 0.1 * u(rng));
    const double height = amplitude * u(rng);
    for (int j = 0; j < grid.size(); ++j) {
      const double d = (grid.x(j) - centre) / width;
      V[j] += height * std::exp(-d * d);
    }
  }
  return V;
}

// Dense matrix of -Delta_h + V.
inline Eigen::MatrixXd dense_hamiltonian(const spstab::Grid& grid, const spstab::RealField& V) {
  const int n = grid.size();
  const double h2 = grid.spacing() * grid.spacing();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    A(j, j) = 2.0 / h2 + V[j];
    if (j > 0) A(j, j - 1) = -1.0 / h2;
    if (j + 1 < n) A(j, j + 1) = -1.0 / h2;
  }
  return A;
}

inline spstab::ComplexField normalized(const spstab::Grid& grid, spstab::ComplexField psi) {
  const double n = spstab::norm_l2(grid, psi);
  for (auto& v : psi) v /= n;
  return psi;
}

}  // namespace testing
