#pragma once

#include <functional>
#include <vector>

namespace spstab {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration of fn over [a, b].
///
/// Subdivides the interval with the largest error estimate until the total
/// estimate drops below max(abs_tol, rel_tol * |value|). Throws
/// NumericalError carrying the achieved error when max_intervals is hit.
QuadratureResult integrate(const std::function<double(double)>& fn, double a, double b,
                           double rel_tol, double abs_tol = 0.0, int max_intervals = 2000);

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, nodes by Newton iteration on P_n.
GaussRule gauss_legendre(int n);

}  // namespace spstab
