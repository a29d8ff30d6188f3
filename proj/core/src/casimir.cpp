#include "spstab/casimir.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spstab/error.hpp"
#include "spstab/quadrature.hpp"

namespace spstab {

namespace {

constexpr double kPi = std::numbers::pi;
// exp(-46) ~ 1e-20: Fermi-Dirac integrands are cut where they drop below that.
constexpr double kTailExponent = 46.0;

double softplus(double y) { return y > 0.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y)); }

// 1 / (eps + e^a) without overflow.
double fermi_factor(double eps, double a) {
  if (a > 0.0) {
    const double e = std::exp(-a);
    return e / (1.0 + eps * e);
  }
  return 1.0 / (eps + std::exp(a));
}

// Radial integral int_0^inf r^2 g(r) dr split at the Fermi radius, where g
// switches from flat to Gaussian decay.
double radial_integral(const std::function<double(double)>& g, double s, double eps,
                       double tol) {
  const double rf2 = 2.0 * std::max(0.0, std::log(eps) - s);
  const double rf = std::sqrt(rf2);
  const double rmax = std::sqrt(rf2 + 2.0 * kTailExponent);
  auto integrand = [&](double r) { return r * r * g(r); };
  double total = 0.0;
  if (rf > 0.0) total += integrate(integrand, 0.0, rf, tol).value;
  total += integrate(integrand, rf, rmax, tol).value;
  return total;
}

double fd_f(const EosParams& p, double s) {
  auto g = [&](double r) { return fermi_factor(p.eps, 0.5 * r * r + s); };
  return 4.0 * kPi * p.C * radial_integral(g, s, p.eps, p.quad_tol);
}

// The inner s-integral of the Fermi factor is elementary:
// int_s^inf dt / (eps + e^{a+t}) = log(1 + eps e^{-a-s}) / eps.
double fd_F(const EosParams& p, double s) {
  const double log_eps = std::log(p.eps);
  auto g = [&](double r) { return softplus(log_eps - 0.5 * r * r - s); };
  return 4.0 * kPi * p.C / p.eps * radial_integral(g, s, p.eps, p.quad_tol);
}

double eval_f(const EosParams& p, double s) {
  switch (p.kind) {
    case EosKind::boltzmann:
      return std::exp(-p.beta * s);
    case EosKind::fermi_dirac:
      return fd_f(p, s);
    case EosKind::power_cutoff:
      return s < p.s0 ? std::pow(p.s0 - s, p.q) : 0.0;
  }
  return 0.0;
}

void validate_params(const EosParams& p) {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  switch (p.kind) {
    case EosKind::boltzmann:
      if (!positive(p.beta)) throw DomainError("Boltzmann eos needs beta > 0");
      break;
    case EosKind::fermi_dirac:
      if (!positive(p.C) || !positive(p.eps)) {
        throw DomainError("Fermi-Dirac eos needs C > 0 and eps > 0");
      }
      if (!positive(p.quad_tol)) throw DomainError("quadrature tolerance must be positive");
      break;
    case EosKind::power_cutoff:
      if (!std::isfinite(p.s0)) throw DomainError("power-cutoff eos needs a finite s0");
      if (!(p.q >= 1.0) || !std::isfinite(p.q)) throw DomainError("power-cutoff eos needs q >= 1");
      break;
  }
}

double eval_F(const EosParams& p, double s) {
  switch (p.kind) {
    case EosKind::boltzmann:
      return std::exp(-p.beta * s) / p.beta;
    case EosKind::fermi_dirac:
      return fd_F(p, s);
    case EosKind::power_cutoff:
      return s < p.s0 ? std::pow(p.s0 - s, p.q + 1.0) / (p.q + 1.0) : 0.0;
  }
  return 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConjugateTable

ConjugateTable::ConjugateTable(std::function<double(double)> f,
                               std::function<double(double)> big_f, double cutoff,
                               double lambda_min, double lambda_max, double dx)
    : f_(std::move(f)),
      big_f_(std::move(big_f)),
      cutoff_(cutoff),
      lambda_min_(lambda_min),
      lambda_max_(lambda_max),
      x_min_(std::log(lambda_min)),
      dx_(dx) {
  if (!(lambda_min > 0.0) || !(lambda_max > lambda_min) || !(dx > 0.0)) {
    throw DomainError("ConjugateTable: invalid range");
  }
  const int panels = static_cast<int>(std::ceil((std::log(lambda_max) - x_min_) / dx_));
  lambda_max_ = std::exp(x_min_ + panels * dx_);
  s_nodes_.resize(panels + 1);

  s_nodes_[0] = inverse_unbracketed(lambda_min_);
  double gap = 1e-3;
  for (int i = 1; i <= panels; ++i) {
    const double lambda = std::exp(x_min_ + i * dx_);
    const double hi = s_nodes_[i - 1];
    double lo = hi - 2.0 * gap;
    while (f_(lo) < lambda) lo = hi - 2.0 * (hi - lo);
    s_nodes_[i] = inverse_in_bracket(lambda, lo, hi);
    gap = std::max(1e-3, hi - s_nodes_[i]);
  }

}

double ConjugateTable::inverse_in_bracket(double lambda, double s_lo, double s_hi, double f_lo,
                                          double f_hi) const {
  // f(s_lo) >= lambda >= f(s_hi); Illinois variant of regula falsi. Endpoint
  // values the caller already knows are passed in, NaN otherwise.
  double g_lo = (std::isnan(f_lo) ? f_(s_lo) : f_lo) - lambda;
  double g_hi = (std::isnan(f_hi) ? f_(s_hi) : f_hi) - lambda;
  if (g_lo == 0.0) return s_lo;
  if (g_hi == 0.0) return s_hi;
  int side = 0;
  double s = 0.5 * (s_lo + s_hi);
  for (int iter = 0; iter < 200; ++iter) {
    if (s_hi - s_lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(s))) {
      break;
    }
    s = (s_lo * g_hi - s_hi * g_lo) / (g_hi - g_lo);
    if (!(s > s_lo && s < s_hi)) s = 0.5 * (s_lo + s_hi);
    const double g = f_(s) - lambda;
    if (g > 0.0) {
      s_lo = s;
      g_lo = g;
      if (side == 1) g_hi *= 0.5;
      side = 1;
    } else if (g < 0.0) {
      s_hi = s;
      g_hi = g;
      if (side == -1) g_lo *= 0.5;
      side = -1;
    } else {
      return s;
    }
  }
  return s;
}

double ConjugateTable::inverse_unbracketed(double lambda) const {
  double hi = std::isfinite(cutoff_) ? cutoff_ : 0.0;
  double step = 1.0;
  while (f_(hi) > lambda) {
    hi += step;
    step *= 2.0;
  }
  double lo = hi - 1.0;
  step = 1.0;
  while (f_(lo) < lambda) {
    hi = lo;
    step *= 2.0;
    lo -= step;
  }
  return inverse_in_bracket(lambda, lo, hi);
}

double ConjugateTable::legendre(double lambda, double s) const {
  return -lambda * s - big_f_(s);
}

double ConjugateTable::panel(double x_a, double x_b, double s_left, double s_right) const {
  static const GaussRule rule = gauss_legendre(10);
  const double mid = 0.5 * (x_a + x_b);
  const double half = 0.5 * (x_b - x_a);
  // f^{-1}(e^x) decreases in x, so each root brackets the next node's root.
  const double s_lo = std::min(s_left, s_right);
  double s_hi = std::max(s_left, s_right);
  const double f_lo = std::exp(std::max(x_a, x_b));
  double f_hi = std::exp(std::min(x_a, x_b));
  std::vector<std::size_t> order_by_x(rule.nodes.size());
  for (std::size_t i = 0; i < order_by_x.size(); ++i) order_by_x[i] = i;
  std::sort(order_by_x.begin(), order_by_x.end(),
            [&](std::size_t a, std::size_t b) { return half * rule.nodes[a] < half * rule.nodes[b]; });
  double sum = 0.0;
  for (const std::size_t i : order_by_x) {
    const double x = mid + half * rule.nodes[i];
    const double lambda = std::exp(x);
    const double s = inverse_in_bracket(lambda, s_lo, s_hi, f_lo, f_hi);
    sum += rule.weights[i] * s * lambda;
    s_hi = s;
    f_hi = lambda;
  }
  return -half * sum;
}

double ConjugateTable::inverse(double lambda) const {
  if (!(lambda > 0.0)) throw DomainError("f^{-1} needs lambda > 0");
  const double x = std::log(lambda);
  const int last = static_cast<int>(s_nodes_.size()) - 1;
  if (lambda < lambda_min_ || lambda > lambda_max_) return inverse_unbracketed(lambda);
  const int i = std::clamp(static_cast<int>((x - x_min_) / dx_), 0, last - 1);
  return inverse_in_bracket(lambda, s_nodes_[i + 1], s_nodes_[i], std::exp(x_min_ + (i + 1) * dx_),
                            std::exp(x_min_ + i * dx_));
}

double ConjugateTable::conjugate(double lambda) const {
  if (lambda < 0.0 || std::isnan(lambda)) throw DomainError("F*(-lambda) needs lambda >= 0");
  if (lambda == 0.0) return 0.0;
  return legendre(lambda, inverse(lambda));
}

double ConjugateTable::integral(double lambda) const {
  if (lambda < 0.0 || std::isnan(lambda)) throw DomainError("F*(-lambda) needs lambda >= 0");
  if (lambda == 0.0) return 0.0;
  const double x = std::log(lambda);
  const int last = static_cast<int>(s_nodes_.size()) - 1;
  std::call_once(fstar_once_, [this, last] {
    fstar_nodes_.resize(last + 1);
    // Below the first node the integral is closed by parts.
    fstar_nodes_[0] = legendre(lambda_min_, s_nodes_[0]);
    for (int i = 1; i <= last; ++i) {
      const double xa = x_min_ + (i - 1) * dx_;
      fstar_nodes_[i] =
          fstar_nodes_[i - 1] + panel(xa, xa + dx_, s_nodes_[i - 1], s_nodes_[i]);
    }
  });

  if (lambda < lambda_min_) return legendre(lambda, inverse_unbracketed(lambda));

  if (lambda <= lambda_max_) {
    const int i = std::clamp(static_cast<int>((x - x_min_) / dx_), 0, last - 1);
    const double xi = x_min_ + i * dx_;
    if (x == xi) return fstar_nodes_[i];
    return fstar_nodes_[i] + panel(xi, x, s_nodes_[i], s_nodes_[i + 1]);
  }

  double total = fstar_nodes_[last];
  double xa = x_min_ + last * dx_;
  double s_a = s_nodes_[last];
  while (xa < x) {
    const double xb = std::min(x, xa + dx_);
    const double s_b = inverse_unbracketed(std::exp(xb));
    total += panel(xa, xb, s_a, s_b);
    xa = xb;
    s_a = s_b;
  }
  return total;
}

// ---------------------------------------------------------------------------
// EquationOfState

EquationOfState::EquationOfState(const EosParams& params) : params_(params) {
  if (params_.kind != EosKind::power_cutoff) {
    params_.s0 = std::numeric_limits<double>::infinity();
  }
  validate_params(params_);
  lazy_ = std::make_shared<LazyTable>();
}

const ConjugateTable& EquationOfState::table() const {
  std::call_once(lazy_->once, [this] {
    const EosParams p = params_;
    lazy_->table = std::make_unique<const ConjugateTable>(
        [p](double s) { return eval_f(p, s); },
        [p](double s) { return eval_F(p, s); }, p.s0);
  });
  return *lazy_->table;
}

EquationOfState EquationOfState::boltzmann(double beta) {
  EosParams p;
  p.kind = EosKind::boltzmann;
  p.beta = beta;
  return EquationOfState(p);
}

EquationOfState EquationOfState::fermi_dirac(double C, double eps, double quad_tol) {
  EosParams p;
  p.kind = EosKind::fermi_dirac;
  p.C = C;
  p.eps = eps;
  p.quad_tol = quad_tol;
  return EquationOfState(p);
}

EquationOfState EquationOfState::power_cutoff(double s0, double q) {
  EosParams p;
  p.kind = EosKind::power_cutoff;
  p.s0 = s0;
  p.q = q;
  return EquationOfState(p);
}

double EquationOfState::cutoff() const noexcept { return params_.s0; }

double EquationOfState::f(double s) const { return eval_f(params_, s); }

double EquationOfState::F(double s) const { return eval_F(params_, s); }

double EquationOfState::f_inverse(double lambda) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("f_inverse needs a finite lambda > 0");
  }
  double right = std::isfinite(params_.s0) ? params_.s0 : 0.0;
  double step = 1.0;
  while (f(right) >= lambda) {
    right += step;
    step *= 2.0;
  }
  double left = right - 1.0;
  step = 1.0;
  while (f(left) <= lambda) {
    right = left;
    step *= 2.0;
    left -= step;
  }
  // invariant: f(left) > lambda > f(right)
  for (int iter = 0; iter < 400 && right - left > 1e-13; ++iter) {
    const double mid = 0.5 * (left + right);
    if (mid <= left || mid >= right) break;
    if (f(mid) > lambda) {
      left = mid;
    } else {
      right = mid;
    }
  }
  return 0.5 * (left + right);
}

double EquationOfState::F_star(double s) const {
  if (s > 0.0 || std::isnan(s)) throw DomainError("F* is only evaluated at s <= 0");
  return table().conjugate(-s);
}

std::string EquationOfState::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(params_.kind);
  switch (params_.kind) {
    case EosKind::boltzmann:
      os << "(beta=" << params_.beta << ")";
      break;
    case EosKind::fermi_dirac:
      os << "(C=" << params_.C << ",eps=" << params_.eps << ")";
      break;
    case EosKind::power_cutoff:
      os << "(s0=" << params_.s0 << ",q=" << params_.q << ")";
      break;
  }
  return os.str();
}

std::string to_string(EosKind kind) {
  switch (kind) {
    case EosKind::boltzmann:
      return "boltzmann";
    case EosKind::fermi_dirac:
      return "fermi_dirac";
    case EosKind::power_cutoff:
      return "power_cutoff";
  }
  return "unknown";
}

EosKind parse_eos_kind(const std::string& name) {
  if (name == "boltzmann") return EosKind::boltzmann;
  if (name == "fermi_dirac" || name == "fermi-dirac") return EosKind::fermi_dirac;
  if (name == "power_cutoff" || name == "power-cutoff") return EosKind::power_cutoff;
  throw DomainError("unknown eos kind '" + name + "'");
}

double casimir_sum(const EquationOfState& eos, std::span<const double> lambda) {
  double sum = 0.0;
  for (double l : lambda) {
    if (l < 0.0 || std::isnan(l)) throw DomainError("casimir_sum: negative occupation");
    sum += eos.F_star(-l);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Casimir-class validation

CasimirClassReport validate_casimir_class(const std::function<double(double)>& f, double s0) {
  CasimirClassReport report;
  std::ostringstream detail;
  const bool finite_cutoff = std::isfinite(s0);
  const double top = finite_cutoff ? s0 : 50.0;

  // (i)
  report.support = true;
  if (!(s0 > 0.0)) {
    report.support = false;
    detail << "(i) cutoff s0 must be positive; ";
  }
  for (int k = 0; k <= 200; ++k) {
    const double s = top - 60.0 + 60.0 * k / 200.0;
    if (finite_cutoff && s >= s0) break;
    if (!(f(s) > 0.0)) {
      report.support = false;
      detail << "(i) f(" << s << ") is not positive; ";
      break;
    }
  }
  if (finite_cutoff) {
    for (double ds : {0.0, 1e-6, 0.5, 1.0, 10.0, 1e3}) {
      if (f(s0 + ds) != 0.0) {
        report.support = false;
        detail << "(i) f does not vanish at s0+" << ds << "; ";
        break;
      }
    }
    if (f(s0 - 1e-9) > 1e-6) {
      report.support = false;
      detail << "(i) f is discontinuous at s0; ";
    }
  }

  // (ii) strictly decreasing on a dense grid below the cutoff, and growing
  // without bound along s = -10^k.
  report.monotone = true;
  double prev = f(top - 60.0);
  for (int k = 1; k <= 4000; ++k) {
    const double s = top - 60.0 + 60.0 * k / 4000.0;
    if (finite_cutoff && s >= s0) break;
    const double cur = f(s);
    if (cur == 0.0 && prev == 0.0 && !finite_cutoff) break;  // underflow
    if (!(cur < prev)) {
      report.monotone = false;
      detail << "(ii) f not strictly decreasing near s=" << s << "; ";
      break;
    }
    prev = cur;
  }
  if (report.monotone) {
    double last = f(std::min(top, 0.0) - 1.0);
    for (double s : {-10.0, -100.0, -1e3, -1e4}) {
      const double cur = f(std::min(s, top - 1.0));
      if (std::isinf(last) && std::isinf(cur)) break;  // overflowed: unbounded
      if (!(cur > last)) {
        report.monotone = false;
        detail << "(ii) f does not grow as s -> -inf; ";
        break;
      }
      last = cur;
    }
    if (report.monotone && !(last > 1e3)) {
      report.monotone = false;
      detail << "(ii) f(-1e4) = " << last << " suggests a bounded limit; ";
    }
  }

  // (iii) with exponent 7/2 + 1/2: the weighted profile (1+s)^4 f(s) must be
  // bounded, which on a finite sample means it is not still increasing at
  // the far end.
  std::vector<double> weighted;
  for (int k = 0; k <= 400; ++k) {
    const double s = k == 0 ? 0.0 : std::pow(10.0, -2.0 + 6.0 * k / 400.0);
    weighted.push_back(std::pow(1.0 + s, 4.0) * f(s));
  }
  report.decay_constant = *std::max_element(weighted.begin(), weighted.end());
  const std::size_t n = weighted.size();
  const double far = *std::max_element(weighted.begin() + 3 * n / 4, weighted.end());
  const double mid = *std::max_element(weighted.begin() + n / 2, weighted.begin() + 3 * n / 4);
  report.decay = std::isfinite(report.decay_constant) && far <= mid;
  if (!report.decay) detail << "(iii) (1+s)^4 f(s) keeps growing; ";

  report.detail = detail.str();
  return report;
}

CasimirClassReport validate_casimir_class(const EquationOfState& eos) {
  return validate_casimir_class([&eos](double s) { return eos.f(s); }, eos.cutoff());
}

}  // namespace spstab
