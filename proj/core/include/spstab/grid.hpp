#pragma once

#include <complex>
#include <span>
#include <vector>

namespace spstab {

using Complex = std::complex<double>;
using RealField = std::vector<double>;
using ComplexField = std::vector<Complex>;

/// Uniform grid on the interval (0, L) with homogeneous Dirichlet data.
///
/// Only the N interior nodes x_j = j*h (j = 1..N, h = L/(N+1)) are stored;
/// the boundary values at x_0 and x_{N+1} are identically zero. Every
/// inner product and norm carries the weight h so that grid refinement
/// converges to the continuum integrals.
class Grid {
 public:
  Grid(double length, int n_points);

  double length() const noexcept { return length_; }
  int size() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }

  /// Coordinate of interior node j (0-based storage index).
  double x(int j) const noexcept { return (j + 1) * h_; }

  /// k-th eigenvalue (1-based) of the free discrete operator -Delta_h.
  double free_eigenvalue(int k) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double length_;
  int n_;
  double h_;
};

template <class Fn>
RealField sample(const Grid& grid, Fn&& fn) {
  RealField out(grid.size());
  for (int j = 0; j < grid.size(); ++j) out[j] = fn(grid.x(j));
  return out;
}

// Discrete MINUS Laplacian, (2u_j - u_{j-1} - u_{j+1}) / h^2 with zero
// ghost values. The sign convention is used throughout the library.
RealField laplacian_apply(const Grid& grid, std::span<const double> u);
ComplexField laplacian_apply(const Grid& grid, std::span<const Complex> u);

/// Solves (-Delta_h) V = n with V = 0 on the boundary.
RealField poisson_solve(const Grid& grid, std::span<const double> n);

double inner(const Grid& grid, std::span<const double> u, std::span<const double> v);
/// Conjugate-linear in the first argument.
Complex inner(const Grid& grid, std::span<const Complex> u, std::span<const Complex> v);

double norm_l2(const Grid& grid, std::span<const double> u);
double norm_l2(const Grid& grid, std::span<const Complex> u);

/// h * sum_{j=0..N} |(u_{j+1} - u_j) / h|^2 including both boundary links.
double grad_norm_sq(const Grid& grid, std::span<const double> u);
double grad_norm_sq(const Grid& grid, std::span<const Complex> u);

double max_abs(std::span<const double> u);

}  // namespace spstab
