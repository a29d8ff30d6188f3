#include "spstab/evolution.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "spstab/error.hpp"

namespace spstab {

namespace {

// LU factors of I + i*tau*H_V for a tridiagonal H_V; the off-diagonal is the
// constant -1/h^2 so only the modified pivots need storing.
class CrankNicolson {
 public:
  CrankNicolson(const Grid& grid, const RealField& V, double dt)
      : n_(grid.size()), tau_(0.5 * dt), inv_h2_(1.0 / (grid.spacing() * grid.spacing())) {
    const Complex I(0.0, 1.0);
    off_ = -I * tau_ * inv_h2_;
    diag_rhs_.resize(n_);
    c_.resize(n_);
    inv_pivot_.resize(n_);
    Complex prev_c{};
    for (int j = 0; j < n_; ++j) {
      const double h_diag = 2.0 * inv_h2_ + V[j];
      diag_rhs_[j] = 1.0 - I * tau_ * h_diag;
      const Complex a = 1.0 + I * tau_ * h_diag;
      const Complex pivot = j == 0 ? a : a - off_ * prev_c;
      if (std::abs(pivot) == 0.0) throw NumericalError("Crank-Nicolson: zero pivot");
      inv_pivot_[j] = 1.0 / pivot;
      c_[j] = off_ * inv_pivot_[j];
      prev_c = c_[j];
    }
  }

  ComplexField apply(const ComplexField& psi) const {
    // right-hand side (I - i tau H) psi; its off-diagonal is -off_
    ComplexField d(n_);
    for (int j = 0; j < n_; ++j) {
      Complex r = diag_rhs_[j] * psi[j];
      if (j > 0) r -= off_ * psi[j - 1];
      if (j + 1 < n_) r -= off_ * psi[j + 1];
      d[j] = r;
    }
    d[0] *= inv_pivot_[0];
    for (int j = 1; j < n_; ++j) d[j] = (d[j] - off_ * d[j - 1]) * inv_pivot_[j];
    for (int j = n_ - 2; j >= 0; --j) d[j] -= c_[j] * d[j + 1];
    return d;
  }

 private:
  int n_;
  double tau_;
  double inv_h2_;
  Complex off_;
  ComplexField diag_rhs_;
  ComplexField c_;
  ComplexField inv_pivot_;
};

std::vector<ComplexField> propagate(const std::vector<ComplexField>& psi, const Grid& grid,
                                    const RealField& V, double dt) {
  const CrankNicolson cn(grid, V, dt);
  std::vector<ComplexField> out;
  out.reserve(psi.size());
  for (const auto& p : psi) out.push_back(cn.apply(p));
  return out;
}

RealField potential_of(const std::vector<ComplexField>& psi, const std::vector<double>& lambda,
                       const Grid& grid) {
  RealField n(grid.size(), 0.0);
  for (std::size_t k = 0; k < psi.size(); ++k) {
    if (lambda[k] == 0.0) continue;
    for (int j = 0; j < grid.size(); ++j) n[j] += lambda[k] * std::norm(psi[k][j]);
  }
  return poisson_solve(grid, n);
}

}  // namespace

EnsembleState step(const EnsembleState& state, double dt, const Grid& grid,
                   const StepOptions& options) {
  validate(state, grid);
  if (dt == 0.0 || !std::isfinite(dt)) throw DomainError("step: dt must be finite and nonzero");
  if (options.midpoint_sweeps < 0) throw DomainError("step: midpoint_sweeps must be >= 0");

  const RealField v_now = potential_of(state.psi, state.lambda, grid);
  const auto predicted = propagate(state.psi, grid, v_now, 0.5 * dt);
  RealField v_half = potential_of(predicted, state.lambda, grid);
  auto next = propagate(state.psi, grid, v_half, dt);

  for (int sweep = 0; sweep < options.midpoint_sweeps; ++sweep) {
    std::vector<ComplexField> mid(next.size());
    for (std::size_t k = 0; k < next.size(); ++k) {
      mid[k].resize(grid.size());
      for (int j = 0; j < grid.size(); ++j) mid[k][j] = 0.5 * (state.psi[k][j] + next[k][j]);
    }
    v_half = potential_of(mid, state.lambda, grid);
    next = propagate(state.psi, grid, v_half, dt);
  }
  return {std::move(next), state.lambda, state.t + dt};
}

std::string to_string(PerturbKind kind) {
  switch (kind) {
    case PerturbKind::none:
      return "none";
    case PerturbKind::phase:
      return "phase";
    case PerturbKind::occupation:
      return "occupation";
    case PerturbKind::mix:
      return "mix";
  }
  return "unknown";
}

PerturbKind parse_perturb_kind(const std::string& name) {
  if (name == "none") return PerturbKind::none;
  if (name == "phase") return PerturbKind::phase;
  if (name == "occupation") return PerturbKind::occupation;
  if (name == "mix") return PerturbKind::mix;
  throw DomainError("unknown perturbation kind '" + name + "'");
}

int tracked_mode_count(const SteadyState& steady, int buffer, double occupied_tol) {
  if (buffer < 0) throw DomainError("tracked_mode_count: negative buffer");
  int occupied = 0;
  for (int k = 0; k < steady.spectral.K; ++k) {
    if (steady.lambda0[k] > occupied_tol * steady.Lambda) occupied = k + 1;
  }
  return std::min(steady.spectral.K, occupied + buffer);
}

EnsembleState steady_ensemble(const SteadyState& steady, int buffer) {
  return to_ensemble(steady, tracked_mode_count(steady, buffer));
}

EnsembleState perturb(const SteadyState& steady, PerturbKind kind, double eps,
                      std::uint64_t seed, int buffer) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("perturb: eps must be >= 0");
  EnsembleState state = steady_ensemble(steady, buffer);
  if (eps == 0.0 || kind == PerturbKind::none) return state;
  const Grid& grid = steady.grid;
  std::mt19937_64 rng(seed);

  switch (kind) {
    case PerturbKind::none:
      break;
    case PerturbKind::phase: {
      for (auto& p : state.psi) {
        for (int j = 0; j < grid.size(); ++j) {
          const double g = std::sin(2.0 * std::numbers::pi * grid.x(j) / grid.length());
          p[j] *= std::polar(1.0, eps * g);
        }
      }
      break;
    }
    case PerturbKind::occupation: {
      std::uniform_real_distribution<double> uniform(-1.0, 1.0);
      for (double& l : state.lambda) l = std::max(0.0, l * (1.0 + eps * uniform(rng)));
      break;
    }
    case PerturbKind::mix: {
      const int K = state.size();
      std::normal_distribution<double> normal(0.0, 1.0);
      Eigen::MatrixXcd M(K, K);
      for (int i = 0; i < K; ++i) {
        for (int j = 0; j < K; ++j) M(i, j) = Complex(normal(rng), normal(rng));
      }
      const Eigen::MatrixXcd A = 0.5 * (M - M.adjoint());
      const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(K, K);
      const Eigen::MatrixXcd U = (I - 0.5 * eps * A).partialPivLu().solve(I + 0.5 * eps * A);
      std::vector<ComplexField> mixed(K, ComplexField(grid.size()));
      for (int i = 0; i < K; ++i) {
        for (int k = 0; k < K; ++k) {
          const Complex u = U(i, k);
          for (int j = 0; j < grid.size(); ++j) mixed[i][j] += u * state.psi[k][j];
        }
      }
      state.psi = std::move(mixed);
      break;
    }
  }
  return state;
}

EvolutionTrace evolve(EnsembleState state, const Grid& grid, const EquationOfState& eos,
                      const EvolveOptions& options, const SteadyState* reference,
                      const SampleCallback& on_sample) {
  validate(state, grid);
  if (!(options.dt > 0.0) || !(options.T >= 0.0)) {
    throw DomainError("evolve: need dt > 0 and T >= 0");
  }
  if (options.sample_every < 1) throw DomainError("evolve: sample_every must be >= 1");
  if (reference && !(reference->grid == grid)) {
    throw DomainError("evolve: reference steady state lives on a different grid");
  }

  EvolutionTrace trace;
  trace.length = grid.length();
  trace.n_points = grid.size();
  trace.eos = eos.describe();
  trace.has_reference = reference != nullptr;
  trace.dt = options.dt;

  RealField n0, v0;
  if (reference) {
    n0 = steady_density(*reference);
    v0 = reference->V0;
  }
  const double casimir = casimir_sum(eos, state.lambda);

  auto record = [&](const EnsembleState& s) {
    const RealField n = density(s, grid);
    const RealField v = poisson_solve(grid, n);
    TraceSample sample;
    sample.t = s.t;
    sample.mass_dev = mass_deviation(s, grid);
    sample.H = kinetic_energy(s, grid) + 0.5 * grad_norm_sq(grid, v);
    sample.HC = casimir + sample.H;
    sample.charge = total_charge(s);
    sample.orth_dev = orthonormality_error(s, grid);
    if (reference) {
      RealField dv(v.size()), dn(n.size());
      for (std::size_t j = 0; j < v.size(); ++j) {
        dv[j] = v[j] - v0[j];
        dn[j] = n[j] - n0[j];
      }
      sample.dist = 0.5 * grad_norm_sq(grid, dv);
      sample.density_dev = max_abs(dn);
    }
    if (sample.orth_dev > options.orthonormality_tol) trace.orthonormality_flag = true;
    trace.samples.push_back(sample);
    if (on_sample) on_sample(s, v);
  };

  const long steps = std::lround(options.T / options.dt);
  record(state);
  std::vector<double> norms(state.size());
  for (int k = 0; k < state.size(); ++k) norms[k] = inner(grid, state.psi[k], state.psi[k]).real();
  const double t0 = state.t;
  for (long i = 1; i <= steps; ++i) {
    state = step(state, options.dt, grid, options.step);
    state.t = t0 + i * options.dt;
    for (int k = 0; k < state.size(); ++k) {
      const double nk = inner(grid, state.psi[k], state.psi[k]).real();
      trace.max_step_mass_change = std::max(trace.max_step_mass_change, std::abs(nk - norms[k]));
      norms[k] = nk;
    }
    if (i % options.sample_every == 0 || i == steps) record(state);
  }
  return trace;
}

}  // namespace spstab
