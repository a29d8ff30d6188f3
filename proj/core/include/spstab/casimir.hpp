#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace spstab {

enum class EosKind { boltzmann, fermi_dirac, power_cutoff };

struct EosParams {
  EosKind kind = EosKind::boltzmann;
  double beta = 1.0;                                  // Boltzmann
  double C = 1.0;                                     // Fermi-Dirac prefactor
  double eps = 1.0;                                   // Fermi-Dirac
  double s0 = std::numeric_limits<double>::infinity();  // cutoff level
  double q = 1.0;                                     // power-cutoff exponent
  double quad_tol = 1e-10;
};

/// Tabulated inverse of f and the conjugate F* on a log-spaced occupation grid.
///
/// Nodes are uniform in x = ln(lambda) over [lambda_min, lambda_max] and store
/// s = f^{-1}(lambda), which brackets every later inversion. The conjugate
/// F*(-lambda) = -int_0^lambda f^{-1}(t) dt is evaluated by integrating by
/// parts, which gives -lambda s - F(s) with s = f^{-1}(lambda): one inversion
/// and one evaluation of F, exact up to round-off. integral() computes the
/// same quantity by Gauss-Legendre panels over the tabulated inverse and
/// serves as an independent cross-check.
class ConjugateTable {
 public:
  /// f is the occupation function and big_f its antiderivative F.
  ConjugateTable(std::function<double(double)> f, std::function<double(double)> big_f,
                 double cutoff, double lambda_min = 1e-30, double lambda_max = 1e3, double dx = 0.1);

  double lambda_min() const noexcept { return lambda_min_; }
  double lambda_max() const noexcept { return lambda_max_; }

  /// f^{-1}(lambda) by a bracketed Illinois iteration seeded from the table.
  double inverse(double lambda) const;
  /// F*(-lambda) for lambda >= 0.
  double conjugate(double lambda) const;
  /// F*(-lambda) by quadrature of -int_0^lambda f^{-1}; the cumulative node
  /// values are built on first use.
  double integral(double lambda) const;

 private:
  double inverse_in_bracket(double lambda, double s_lo, double s_hi,
                            double f_lo = std::numeric_limits<double>::quiet_NaN(),
                            double f_hi = std::numeric_limits<double>::quiet_NaN()) const;
  double inverse_unbracketed(double lambda) const;
  // -int_{x_a}^{x_b} f^{-1}(e^x) e^x dx
  double panel(double x_a, double x_b, double s_left, double s_right) const;
  // F*(-lambda) = -lambda s - F(s) with s = f^{-1}(lambda)
  double legendre(double lambda, double s) const;

  std::function<double(double)> f_;
  std::function<double(double)> big_f_;
  double cutoff_;
  double lambda_min_, lambda_max_, x_min_, dx_;
  std::vector<double> s_nodes_;
  mutable std::once_flag fstar_once_;
  mutable std::vector<double> fstar_nodes_;
};

/// A Casimir-class equation of state f together with F, f^{-1} and F*.
///
/// Immutable after construction; copies share the conjugate table.
class EquationOfState {
 public:
  explicit EquationOfState(const EosParams& params);

  static EquationOfState boltzmann(double beta);
  static EquationOfState fermi_dirac(double C, double eps, double quad_tol = 1e-10);
  static EquationOfState power_cutoff(double s0, double q);

  const EosParams& params() const noexcept { return params_; }
  EosKind kind() const noexcept { return params_.kind; }
  /// s0; +inf for Boltzmann and Fermi-Dirac.
  double cutoff() const noexcept;

  double f(double s) const;
  /// F(s) = int_s^inf f.
  double F(double s) const;
  /// Solves f(s) = lambda by bisection on a bracket grown from s0 (or 0).
  double f_inverse(double lambda) const;
  /// Legendre conjugate F*(s) for s <= 0.
  double F_star(double s) const;

  /// Built on first use (thread-safe) and shared between copies.
  const ConjugateTable& table() const;
  std::string describe() const;

 private:
  struct LazyTable {
    std::once_flag once;
    std::unique_ptr<const ConjugateTable> table;
  };

  EosParams params_;
  std::shared_ptr<LazyTable> lazy_;
};

std::string to_string(EosKind kind);
EosKind parse_eos_kind(const std::string& name);

/// sum_k F*(-lambda_k); throws DomainError on a negative occupation.
double casimir_sum(const EquationOfState& eos, std::span<const double> lambda);

struct CasimirClassReport {
  bool support = false;    // (i)  positive below s0, zero above, continuous at s0
  bool monotone = false;   // (ii) strictly decreasing, unbounded as s -> -inf
  bool decay = false;      // (iii) f(s) <= C (1+s)^{-7/2-eps}
  double decay_constant = 0.0;
  std::string detail;

  bool pass() const { return support && monotone && decay; }
};

CasimirClassReport validate_casimir_class(const EquationOfState& eos);
/// Same checks for an arbitrary function with cutoff s0.
CasimirClassReport validate_casimir_class(const std::function<double(double)>& f, double s0);

}  // namespace spstab
