#include "spstab/stability.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>

#include "spstab/error.hpp"

namespace spstab {

StabilityReport stability_audit(const EvolutionTrace& trace, const SteadyState& steady,
                                const EquationOfState& eos, double tol) {
  if (trace.samples.empty()) throw DomainError("stability_audit: empty trace");
  if (!trace.has_reference) throw DomainError("stability_audit: trace has no reference distances");
  if (trace.n_points != steady.grid.size() || trace.length != steady.grid.length()) {
    throw DomainError("stability_audit: trace and steady state use different grids");
  }
  const std::string steady_eos = EquationOfState(steady.eos).describe();
  if (trace.eos != eos.describe() || steady_eos != eos.describe()) {
    throw DomainError("stability_audit: trace, steady state and eos disagree (" + trace.eos +
                      " / " + steady_eos + " / " + eos.describe() + ")");
  }
  if (!(tol >= 0.0)) throw DomainError("stability_audit: negative tolerance");

  StabilityReport report;
  report.tolerance = tol;
  const double sigma0 = steady.sigma0;
  double steady_charge = 0.0;
  for (double l : steady.lambda0) steady_charge += l;
  report.steady_hc = steady.certificates.hc_value + sigma0 * steady_charge;
  const TraceSample& first = trace.samples.front();
  report.initial_hc = first.HC + sigma0 * first.charge;
  report.bound = report.initial_hc - report.steady_hc;

  report.margin = std::numeric_limits<double>::infinity();
  for (const TraceSample& s : trace.samples) {
    report.times.push_back(s.t);
    report.distances.push_back(s.dist);
    report.hc_drift = std::max(report.hc_drift, std::abs(s.HC - first.HC));
    report.margin = std::min(report.margin, report.bound - s.dist);
    const double excess = s.dist - report.bound - tol;
    if (excess > 0.0 || !std::isfinite(s.dist)) report.violations.push_back({s.t, excess});
  }
  return report;
}

TraceInequality trace_inequality_check(const EnsembleState& state, const RealField& V,
                                       const EquationOfState& eos, const Grid& grid, int K) {
  validate(state, grid);
  const Hamiltonian H(grid, V);
  if (H.potential_min() < -1e-12) throw DomainError("trace_inequality_check: V must be >= 0");
  const SpectralData spectrum = eigensolve(H, K);

  TraceInequality out;
  out.lhs = casimir_sum(eos, state.lambda);
  for (int k = 0; k < state.size(); ++k) {
    if (state.lambda[k] == 0.0) continue;
    const ComplexField Hpsi = H.apply(std::span<const Complex>(state.psi[k]));
    out.lhs += state.lambda[k] * inner(grid, state.psi[k], Hpsi).real();
  }
  out.rhs = -spectral_sum_F(spectrum, 0.0, eos).value;
  out.margin = out.lhs - out.rhs;
  return out;
}

JensenCheck jensen_check(const ComplexField& psi, const RealField& V, const EquationOfState& eos,
                         const Grid& grid, int K) {
  if (static_cast<int>(psi.size()) != grid.size()) throw DomainError("jensen_check: size mismatch");
  const double norm = norm_l2(grid, psi);
  if (std::abs(norm - 1.0) > 1e-10) throw DomainError("jensen_check: psi must be normalized");
  const Hamiltonian H(grid, V);
  if (H.potential_min() < -1e-12) throw DomainError("jensen_check: V must be >= 0");
  const SpectralData spectrum = eigensolve(H, K);

  const ComplexField Hpsi = H.apply(std::span<const Complex>(psi));
  JensenCheck out;
  out.lhs = eos.F(inner(grid, psi, Hpsi).real());
  double captured = 0.0;
  for (int k = 0; k < spectrum.K; ++k) {
    double re = 0.0, im = 0.0;
    const double h = grid.spacing();
    for (int j = 0; j < grid.size(); ++j) {
      re += h * spectrum.psi[k][j] * psi[j].real();
      im += h * spectrum.psi[k][j] * psi[j].imag();
    }
    const double w = re * re + im * im;
    captured += w;
    out.rhs += eos.F(spectrum.mu[k]) * w;
  }
  // every omitted eigenvalue is >= mu_K, and F is decreasing
  const double rest = std::max(0.0, 1.0 - captured);
  out.tail = rest * eos.F(spectrum.mu.back());
  out.rhs += out.tail;
  return out;
}

Eigen::MatrixXcd random_unitary(int K, std::mt19937_64& rng) {
  if (K < 1) throw DomainError("random_unitary: K must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd Z(K, K);
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j) Z(i, j) = Complex(normal(rng), normal(rng));
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Z);
  Eigen::MatrixXcd Q = qr.householderQ();
  const Eigen::MatrixXcd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < K; ++j) {
    const Complex d = R(j, j);
    const double a = std::abs(d);
    if (a > 0.0) Q.col(j) *= d / a;
  }
  return Q;
}

EnsembleState random_ensemble(const SpectralData& spectrum, const EquationOfState& eos,
                              std::mt19937_64& rng) {
  const int K = spectrum.K;
  const int n = spectrum.grid.size();
  const Eigen::MatrixXcd U = random_unitary(K, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  EnsembleState state;
  state.psi.assign(K, ComplexField(n));
  for (int i = 0; i < K; ++i) {
    for (int k = 0; k < K; ++k) {
      const Complex u = U(i, k);
      for (int j = 0; j < n; ++j) state.psi[i][j] += u * spectrum.psi[k][j];
    }
  }
  state.lambda.resize(K);
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    const double shift = -2.0 + 4.0 * unit(rng);
    const double weight = 0.25 + 1.5 * unit(rng);
    state.lambda[k] = weight * eos.f(spectrum.mu[k] + shift);
    total += state.lambda[k];
  }
  const double target = 0.5 + 1.5 * unit(rng);
  if (total > 0.0) {
    for (double& l : state.lambda) l *= target / total;
  }
  return state;
}

}  // namespace spstab
