#include "spstab/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spstab/error.hpp"

namespace spstab {

namespace {

// Phi comparisons tolerate floating-point evaluation noise: a relative part,
// plus the eigenvalue rounding (about eps * ||H|| per level) weighted by the
// total occupation.
constexpr double kPhiSlack = 1e-13;

double phi_noise_floor(const Grid& grid, double Lambda) {
  const double h = grid.spacing();
  return 4.0 * std::numeric_limits<double>::epsilon() * (4.0 / (h * h)) * (1.0 + Lambda);
}

double phi_from_spectrum(std::span<const double> V, const SpectralData& spectrum, double sigma,
                         const EquationOfState& eos, double Lambda, double truncation_tol) {
  return -0.5 * grad_norm_sq(spectrum.grid, V) -
         trace_F(spectrum, sigma, eos, truncation_tol) - sigma * Lambda;
}

RealField density_from_spectrum(const SpectralData& spectrum, double sigma,
                                const EquationOfState& eos, std::vector<double>* occupations) {
  const int n = spectrum.grid.size();
  RealField dens(n, 0.0);
  if (occupations) occupations->assign(spectrum.K, 0.0);
  for (int k = 0; k < spectrum.K; ++k) {
    const double l = eos.f(spectrum.mu[k] + sigma);
    if (occupations) (*occupations)[k] = l;
    if (l == 0.0) continue;
    for (int j = 0; j < n; ++j) dens[j] += l * spectrum.psi[k][j] * spectrum.psi[k][j];
  }
  return dens;
}

double poisson_residual(const Grid& grid, std::span<const double> V, std::span<const double> n) {
  RealField r = laplacian_apply(grid, V);
  for (std::size_t j = 0; j < r.size(); ++j) r[j] -= n[j];
  return max_abs(r);
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

void require_feasible_potential(std::span<const double> V) {
  for (std::size_t j = 0; j < V.size(); ++j) {
    if (V[j] < -1e-12) {
      throw NumericalError("potential became negative at node " + std::to_string(j + 1) +
                               " (V=" + std::to_string(V[j]) + ")",
                           V[j]);
    }
  }
}

struct Iterate {
  RealField V;
  SpectralData spectrum;
  double sigma;
  double phi;
};

class SteadySolver {
 public:
  SteadySolver(const EquationOfState& eos, double Lambda, const Grid& grid,
               const SolverOptions& options)
      : eos_(eos), Lambda_(Lambda), grid_(grid), options_(options) {
    K_ = options.K > 0 ? options.K : default_truncation(grid);
    noise_ = phi_noise_floor(grid, Lambda);
  }

  // Fermi-optimal sigma for the given V.
  Iterate evaluate(RealField V) const {
    SpectralData spectrum = eigensolve(Hamiltonian(grid_, V), K_);
    const double sigma = solve_fermi_level(spectrum, eos_, Lambda_, options_.truncation_tol);
    const double phi = phi_from_spectrum(V, spectrum, sigma, eos_, Lambda_, options_.truncation_tol);
    return {std::move(V), std::move(spectrum), sigma, phi};
  }

  SteadyState run() {
    RealField V = options_.initial_V.empty() ? RealField(grid_.size(), 0.0) : options_.initial_V;
    if (V.size() != static_cast<std::size_t>(grid_.size())) {
      throw DomainError("solve_steady: initial potential has the wrong length");
    }
    validate(DualPoint{V, 0.0}, grid_);
    Iterate cur = evaluate(std::move(V));
    if (options_.method == SolverMethod::ascent) return ascent(std::move(cur));
    return scf(std::move(cur));
  }

 private:
  bool converged(const Iterate& it, double* residual, double* charge, RealField* dens) const {
    std::vector<double> lambda;
    *dens = density_from_spectrum(it.spectrum, it.sigma, eos_, &lambda);
    *residual = poisson_residual(grid_, it.V, *dens);
    *charge = std::abs(sum(lambda) - Lambda_);
    return *residual < options_.tol_V && *charge < options_.tol_lambda;
  }

  SteadyState scf(Iterate cur) {
    double alpha = options_.damping;
    for (int iter = 0; iter <= options_.max_iter; ++iter) {
      double residual = 0.0, charge = 0.0;
      RealField dens;
      const bool done = converged(cur, &residual, &charge, &dens);
      phi_history_.push_back(cur.phi);
      residual_history_.push_back(residual);
      if (done) return finish(std::move(cur), iter);
      if (iter == options_.max_iter) break;

      const RealField target = poisson_solve(grid_, dens);
      while (true) {
        RealField trial(grid_.size());
        for (int j = 0; j < grid_.size(); ++j) trial[j] = (1.0 - alpha) * cur.V[j] + alpha * target[j];
        require_feasible_potential(trial);
        Iterate next = evaluate(std::move(trial));
        if (next.phi >= cur.phi - phi_slack(cur.phi)) {
          cur = std::move(next);
          alpha = std::min(options_.damping, 2.0 * alpha);
          break;
        }
        alpha *= 0.5;
        if (alpha < 1e-12) {
          throw ConvergenceError("solve_steady: damping underflow, Phi cannot be increased",
                                 residual_history_);
        }
      }
    }
    throw ConvergenceError("solve_steady: no convergence after " +
                               std::to_string(options_.max_iter) + " iterations",
                           residual_history_);
  }

  SteadyState ascent(Iterate cur) {
    // sigma stays Fermi-optimal for every V, so the sigma-component of the
    // gradient vanishes and V moves along the H^1_0 Riesz representative
    // P(Delta V + n) = poisson_solve(n) - V of the L^2 gradient.
    double t = 1.0;
    for (int iter = 0; iter <= options_.max_iter; ++iter) {
      double residual = 0.0, charge = 0.0;
      RealField dens;
      const bool done = converged(cur, &residual, &charge, &dens);
      phi_history_.push_back(cur.phi);
      residual_history_.push_back(residual);
      if (done) return finish(std::move(cur), iter);
      if (iter == options_.max_iter) break;

      RealField grad = laplacian_apply(grid_, cur.V);
      for (int j = 0; j < grid_.size(); ++j) grad[j] = dens[j] - grad[j];
      const RealField dir = poisson_solve(grid_, grad);
      const double slope = inner(grid_, grad, dir);

      t = std::min(1.0, 2.0 * t);
      while (true) {
        RealField trial(grid_.size());
        for (int j = 0; j < grid_.size(); ++j) trial[j] = cur.V[j] + t * dir[j];
        require_feasible_potential(trial);
        Iterate next = evaluate(std::move(trial));
        if (next.phi - cur.phi >= 1e-4 * t * slope - phi_slack(cur.phi)) {
          cur = std::move(next);
          break;
        }
        t *= 0.5;
        if (t < 1e-12) {
          throw ConvergenceError("solve_steady: line search failed", residual_history_);
        }
      }
    }
    throw ConvergenceError("solve_steady: no convergence after " +
                               std::to_string(options_.max_iter) + " iterations",
                           residual_history_);
  }

  double phi_slack(double phi) const { return kPhiSlack * (1.0 + std::abs(phi)) + noise_; }

  SteadyState finish(Iterate cur, int iterations) {
    SteadyState out{grid_, eos_.params(), Lambda_, std::move(cur.V), cur.sigma,
                    std::move(cur.spectrum), {}, {}, {}, {}, 0, 0.0};
    out.spectral.tail_bound = spectral_sum_f(out.spectral, out.sigma0, eos_).tail_bound;
    const RealField dens = density_from_spectrum(out.spectral, out.sigma0, eos_, &out.lambda0);
    out.certificates.poisson_residual_inf = poisson_residual(grid_, out.V0, dens);
    out.certificates.charge_residual = std::abs(sum(out.lambda0) - Lambda_);
    out.certificates.phi_value = cur.phi;
    out.certificates.hc_value = energy_casimir(to_ensemble(out), grid_, eos_);
    out.phi_history = std::move(phi_history_);
    out.residual_history = std::move(residual_history_);
    out.iterations = iterations;
    out.phi_tolerance = phi_slack(cur.phi);
    for (double v : out.V0) {
      if (v < -1e-12) throw NumericalError("steady potential is negative", v);
    }
    return out;
  }

  const EquationOfState& eos_;
  double Lambda_;
  Grid grid_;
  SolverOptions options_;
  int K_;
  double noise_ = 0.0;
  std::vector<double> phi_history_;
  std::vector<double> residual_history_;
};

}  // namespace

void validate(const DualPoint& point, const Grid& grid) {
  if (point.V.size() != static_cast<std::size_t>(grid.size())) {
    throw DomainError("dual point: potential length does not match grid");
  }
  for (double v : point.V) {
    if (!(v >= -1e-12)) throw DomainError("dual point: potential must be nonnegative");
  }
  if (!std::isfinite(point.sigma)) throw DomainError("dual point: sigma must be finite");
}

double phi_eval(const DualPoint& point, const EquationOfState& eos, double Lambda,
                const Grid& grid, int K) {
  validate(point, grid);
  const SpectralData spectrum = eigensolve(Hamiltonian(grid, point.V), K);
  return phi_from_spectrum(point.V, spectrum, point.sigma, eos, Lambda, 1e-8);
}

DualGradient phi_gradient(const DualPoint& point, const EquationOfState& eos, double Lambda,
                          const Grid& grid, int K) {
  validate(point, grid);
  const SpectralData spectrum = eigensolve(Hamiltonian(grid, point.V), K);
  std::vector<double> lambda;
  RealField field = density_from_spectrum(spectrum, point.sigma, eos, &lambda);
  const RealField lap = laplacian_apply(grid, point.V);
  for (int j = 0; j < grid.size(); ++j) field[j] -= lap[j];
  return {std::move(field), trace_f(spectrum, point.sigma, eos) - Lambda};
}

double solve_fermi_level(const SpectralData& spectrum, const EquationOfState& eos, double Lambda,
                         double truncation_tol) {
  if (!(Lambda > 0.0) || !std::isfinite(Lambda)) {
    throw DomainError("solve_fermi_level: Lambda must be positive");
  }
  auto charge = [&](double sigma) {
    double s = 0.0;
    for (double mu : spectrum.mu) s += eos.f(mu + sigma);
    return s;
  };
  const double anchor = std::isfinite(eos.cutoff()) ? eos.cutoff() : 0.0;
  double hi = anchor - spectrum.mu.front();
  double step = 1.0;
  while (charge(hi) >= Lambda) {
    hi += step;
    step *= 2.0;
    if (step > 1e12) throw InfeasibleError("solve_fermi_level: no upper bracket");
  }
  double lo = hi - 1.0;
  step = 1.0;
  while (charge(lo) <= Lambda) {
    hi = lo;
    step *= 2.0;
    lo -= step;
    if (step > 1e12) throw InfeasibleError("solve_fermi_level: no lower bracket");
  }
  // charge(lo) > Lambda > charge(hi); the charge is decreasing in sigma.
  for (int iter = 0; iter < 300; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (charge(mid) > Lambda) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double c_lo = charge(lo) - Lambda;
  const double c_hi = charge(hi) - Lambda;
  const double sigma = std::abs(c_lo) <= std::abs(c_hi) ? lo : hi;
  const SpectralSum total = spectral_sum_f(spectrum, sigma, eos);
  if (total.tail_bound > truncation_tol * Lambda) {
    throw InfeasibleError("solve_fermi_level: charge " + std::to_string(Lambda) +
                              " needs more than K=" + std::to_string(spectrum.K) + " modes",
                          total.tail_bound);
  }
  return sigma;
}

double solve_fermi_level(const Hamiltonian& hamiltonian, const EquationOfState& eos,
                         double Lambda, int K) {
  return solve_fermi_level(eigensolve(hamiltonian, K), eos, Lambda);
}

SteadyState solve_steady(const EquationOfState& eos, double Lambda, const Grid& grid,
                         const SolverOptions& options) {
  if (!(Lambda > 0.0) || !std::isfinite(Lambda)) {
    throw DomainError("solve_steady: Lambda must be positive");
  }
  if (!(options.damping > 0.0 && options.damping <= 1.0)) {
    throw DomainError("solve_steady: damping must lie in (0, 1]");
  }
  if (options.max_iter < 1) throw DomainError("solve_steady: max_iter must be positive");
  return SteadySolver(eos, Lambda, grid, options).run();
}

EnsembleState to_ensemble(const SteadyState& steady, int count) {
  const int K = steady.spectral.K;
  if (count < 0 || count > K) count = K;
  EnsembleState state;
  state.psi.reserve(count);
  for (int k = 0; k < count; ++k) {
    state.psi.emplace_back(steady.spectral.psi[k].begin(), steady.spectral.psi[k].end());
    state.lambda.push_back(steady.lambda0[k]);
  }
  return state;
}

RealField steady_density(const SteadyState& steady) {
  RealField n(steady.grid.size(), 0.0);
  for (int k = 0; k < steady.spectral.K; ++k) {
    for (int j = 0; j < steady.grid.size(); ++j) {
      n[j] += steady.lambda0[k] * steady.spectral.psi[k][j] * steady.spectral.psi[k][j];
    }
  }
  return n;
}

}  // namespace spstab
