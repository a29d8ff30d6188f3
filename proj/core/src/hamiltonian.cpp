#include "spstab/hamiltonian.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "spstab/error.hpp"

namespace spstab {

Hamiltonian::Hamiltonian(Grid grid, RealField potential)
    : grid_(grid), potential_(std::move(potential)), v_min_(0.0) {
  if (potential_.size() != static_cast<std::size_t>(grid_.size())) {
    throw DomainError("Hamiltonian: potential length does not match grid");
  }
  v_min_ = *std::min_element(potential_.begin(), potential_.end());
  for (double v : potential_) {
    if (!std::isfinite(v)) throw DomainError("Hamiltonian: potential is not finite");
  }
}

std::vector<double> Hamiltonian::diagonal() const {
  const double d0 = 2.0 / (grid_.spacing() * grid_.spacing());
  std::vector<double> d(potential_.size());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = d0 + potential_[j];
  return d;
}

RealField Hamiltonian::apply(std::span<const double> u) const {
  RealField out = laplacian_apply(grid_, u);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += potential_[j] * u[j];
  return out;
}

ComplexField Hamiltonian::apply(std::span<const Complex> u) const {
  ComplexField out = laplacian_apply(grid_, u);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += potential_[j] * u[j];
  return out;
}

int default_truncation(const Grid& grid) { return std::min(grid.size(), 48); }

SpectralData eigensolve(const Hamiltonian& hamiltonian, int K) {
  const Grid& grid = hamiltonian.grid();
  const int n = grid.size();
  if (K < 1 || K > n) {
    throw DomainError("eigensolve: K=" + std::to_string(K) + " outside [1, " +
                      std::to_string(n) + "]");
  }
  std::vector<double> d = hamiltonian.diagonal();
  std::vector<double> e(n, hamiltonian.off_diagonal());
  std::vector<double> w(n);
  std::vector<double> z(static_cast<std::size_t>(n) * K);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(K));
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, 1, K, 0.0,
                     &found, w.data(), z.data(), n, support.data());
  if (info != 0 || found != K) {
    throw NumericalError("eigensolve: dstevr failed with info=" + std::to_string(info));
  }

  SpectralData out{grid, 0, {}, {}, {}, 0.0, 0.0, 0.0};
  out.K = K;
  out.potential_min = hamiltonian.potential_min();
  out.mu.assign(w.begin(), w.begin() + K);
  out.psi.resize(K);
  out.residuals.resize(K);
  const double scale = 1.0 / std::sqrt(grid.spacing());
  for (int k = 0; k < K; ++k) {
    RealField v(z.begin() + static_cast<std::ptrdiff_t>(k) * n,
                z.begin() + static_cast<std::ptrdiff_t>(k + 1) * n);
    const double vmax = max_abs(v);
    const auto lead = std::find_if(v.begin(), v.end(),
                                   [&](double x) { return std::abs(x) > 1e-10 * vmax; });
    const double sign = (lead != v.end() && *lead < 0.0) ? -1.0 : 1.0;
    for (double& x : v) x *= sign * scale;

    RealField r = hamiltonian.apply(v);
    for (int j = 0; j < n; ++j) r[j] -= out.mu[k] * v[j];
    out.residuals[k] = norm_l2(grid, r);
    if (out.residuals[k] > 1e-9 * (1.0 + std::abs(out.mu[k]))) {
      throw NumericalError("eigensolve: residual too large for mode " + std::to_string(k + 1),
                           out.residuals[k]);
    }
    out.psi[k] = std::move(v);
  }
  for (int k = 0; k + 1 < K; ++k) {
    if (out.mu[k + 1] - out.mu[k] <= 1e-12 * (1.0 + std::abs(out.mu[k]))) {
      throw NumericalError("eigensolve: degenerate eigenvalues at mode " + std::to_string(k + 1));
    }
  }
  double orth = 0.0;
  for (int i = 0; i < K; ++i) {
    for (int j = i; j < K; ++j) {
      const double g = inner(grid, out.psi[i], out.psi[j]);
      orth = std::max(orth, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  }
  out.orthonormality_error = orth;
  if (orth > 1e-10) throw NumericalError("eigensolve: eigenfields not orthonormal", orth);
  return out;
}

namespace {

SpectralSum spectral_sum(const SpectralData& spectrum, double sigma,
                         const std::function<double(double)>& g) {
  SpectralSum out;
  for (double mu : spectrum.mu) out.value += g(mu + sigma);
  // g is nonincreasing, and mu_k(V) >= mu_k(0) + min V by min-max.
  const int n = spectrum.grid.size();
  for (int k = spectrum.K + 1; k <= n; ++k) {
    const double term = g(spectrum.grid.free_eigenvalue(k) + spectrum.potential_min + sigma);
    if (term == 0.0) break;
    if (term <= 1e-20 * (out.value + out.tail_bound)) {
      out.tail_bound += term * (n - k + 1);
      break;
    }
    out.tail_bound += term;
  }
  return out;
}

double checked(const SpectralSum& sum, double rel_tol, const char* what) {
  if (sum.tail_bound > rel_tol * std::abs(sum.value)) {
    throw TruncationError(std::string(what) + ": neglected modes may carry " +
                              std::to_string(sum.tail_bound) + " of " +
                              std::to_string(sum.value) + "; increase K",
                          sum.tail_bound);
  }
  return sum.value;
}

}  // namespace

SpectralSum spectral_sum_F(const SpectralData& spectrum, double sigma, const EquationOfState& eos) {
  return spectral_sum(spectrum, sigma, [&eos](double s) { return eos.F(s); });
}

SpectralSum spectral_sum_f(const SpectralData& spectrum, double sigma, const EquationOfState& eos) {
  return spectral_sum(spectrum, sigma, [&eos](double s) { return eos.f(s); });
}

double trace_F(const SpectralData& spectrum, double sigma, const EquationOfState& eos,
               double rel_tol) {
  return checked(spectral_sum_F(spectrum, sigma, eos), rel_tol, "trace_F");
}

double trace_f(const SpectralData& spectrum, double sigma, const EquationOfState& eos,
               double rel_tol) {
  return checked(spectral_sum_f(spectrum, sigma, eos), rel_tol, "trace_f");
}

}  // namespace spstab
