#pragma once

// One-dimensional quadrature over finite intervals for scalar and small
// vector-valued integrands (block entries are integrated together).

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "dk/errors.hpp"

namespace dk {

enum class QuadMethod { adaptive, gauss };

struct QuadratureSpec {
  QuadMethod method = QuadMethod::adaptive;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_subdivisions = 2000;
  /// Mandatory breakpoints strictly inside the integration interval.
  std::vector<double> split_points;
  /// Fixed-node method: panels per split segment, 20-point Gauss-Legendre in each.
  int gauss_panels = 64;
  /// Adds breakpoints clustered at the gap-closing momentum when |h| is near 1.
  bool auto_critical_splits = true;

  void validate() const;
};

/// Up to 8 real components, stored without heap allocation.
using QVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 8, 1>;
using VecIntegrand = std::function<QVec(double)>;

struct QuadResult {
  QVec value;
  double error = 0.0;  // max-norm error estimate
  int intervals = 0;
};

struct ScalarQuadResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

/// Integrates f over [a, b]. Adaptive: global GK21 bisection until
/// error <= max(abs_tol, rel_tol |value|). Throws QuadratureFailure past max_subdivisions.
QuadResult integrate(const VecIntegrand& f, int dim, double a, double b, const QuadratureSpec& spec);
ScalarQuadResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec);

/// Breakpoints in (0, pi) resolving the angle variation on scale ||h| - 1|.
std::vector<double> critical_split_points(double h);

/// spec with critical breakpoints for field h merged in (if enabled).
QuadratureSpec with_critical_splits(const QuadratureSpec& spec, double h);

}  // namespace dk
