#include "spstab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "spstab/error.hpp"

namespace spstab {

namespace {

void require_size(const Grid& grid, std::size_t n, const char* what) {
  if (n != static_cast<std::size_t>(grid.size())) {
    throw DomainError(std::string(what) + ": field length " + std::to_string(n) +
                      " does not match grid size " + std::to_string(grid.size()));
  }
}

template <class T>
std::vector<T> minus_laplacian(const Grid& grid, std::span<const T> u) {
  require_size(grid, u.size(), "laplacian_apply");
  const int n = grid.size();
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  std::vector<T> out(n);
  for (int j = 0; j < n; ++j) {
    const T left = j > 0 ? u[j - 1] : T{};
    const T right = j + 1 < n ? u[j + 1] : T{};
    out[j] = (2.0 * u[j] - left - right) * inv_h2;
  }
  return out;
}

template <class T>
double grad_sq(const Grid& grid, std::span<const T> u) {
  require_size(grid, u.size(), "grad_norm_sq");
  const int n = grid.size();
  double sum = 0.0;
  T prev{};
  for (int j = 0; j <= n; ++j) {
    const T cur = j < n ? u[j] : T{};
    sum += std::norm(cur - prev);
    prev = cur;
  }
  return sum / grid.spacing();
}

}  // namespace

Grid::Grid(double length, int n_points) : length_(length), n_(n_points), h_(0.0) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw DomainError("grid length must be positive and finite");
  }
  if (n_points < 1) throw DomainError("grid needs at least one interior node");
  h_ = length / (n_points + 1);
}

double Grid::free_eigenvalue(int k) const {
  if (k < 1 || k > n_) throw DomainError("free_eigenvalue: index out of range");
  // 2(1 - cos t)/h^2 written as 4 sin^2(t/2)/h^2 to avoid cancellation
  const double half = 0.5 * k * std::numbers::pi / (n_ + 1);
  const double s = std::sin(half);
  return 4.0 * s * s / (h_ * h_);
}

RealField laplacian_apply(const Grid& grid, std::span<const double> u) {
  return minus_laplacian(grid, u);
}

ComplexField laplacian_apply(const Grid& grid, std::span<const Complex> u) {
  return minus_laplacian(grid, u);
}

RealField poisson_solve(const Grid& grid, std::span<const double> n) {
  require_size(grid, n.size(), "poisson_solve");
  // Thomas algorithm on tridiag(-1, 2, -1) V = h^2 n; the matrix is SPD so
  // no pivoting is needed.
  const int size = grid.size();
  const double h2 = grid.spacing() * grid.spacing();
  std::vector<double> c(size), d(size);
  double denom = 2.0;
  c[0] = -1.0 / denom;
  d[0] = h2 * n[0] / denom;
  for (int j = 1; j < size; ++j) {
    denom = 2.0 + c[j - 1];
    c[j] = -1.0 / denom;
    d[j] = (h2 * n[j] + d[j - 1]) / denom;
  }
  RealField v(size);
  v[size - 1] = d[size - 1];
  for (int j = size - 2; j >= 0; --j) v[j] = d[j] - c[j] * v[j + 1];
  return v;
}

double inner(const Grid& grid, std::span<const double> u, std::span<const double> v) {
  require_size(grid, u.size(), "inner");
  require_size(grid, v.size(), "inner");
  double sum = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) sum += u[j] * v[j];
  return grid.spacing() * sum;
}

Complex inner(const Grid& grid, std::span<const Complex> u, std::span<const Complex> v) {
  require_size(grid, u.size(), "inner");
  require_size(grid, v.size(), "inner");
  Complex sum{};
  for (std::size_t j = 0; j < u.size(); ++j) sum += std::conj(u[j]) * v[j];
  return grid.spacing() * sum;
}

double norm_l2(const Grid& grid, std::span<const double> u) {
  return std::sqrt(inner(grid, u, u));
}

double norm_l2(const Grid& grid, std::span<const Complex> u) {
  return std::sqrt(inner(grid, u, u).real());
}

double grad_norm_sq(const Grid& grid, std::span<const double> u) { return grad_sq(grid, u); }

double grad_norm_sq(const Grid& grid, std::span<const Complex> u) { return grad_sq(grid, u); }

double max_abs(std::span<const double> u) {
  double m = 0.0;
  for (double x : u) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace spstab
