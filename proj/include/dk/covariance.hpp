#pragma once

// Covariance blocks C_d of the translation-invariant chain from momentum integrals.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dk/bath.hpp"
#include "dk/greens.hpp"
#include "dk/quadrature.hpp"

namespace dk {

inline constexpr int max_displacement = 10000;

enum class CovKind { time, steady, steady_weak, ground };

/// Everything a momentum integrand needs.
struct CovRequest {
  CovKind kind = CovKind::steady;
  double h = 0.0;
  CouplingProfile profile = CouplingProfile::local(1.0);
  BathSpec bath{};
  int d = 0;
  double t = 0.0;
  double t_in = 0.0;
  TransientRate rate = TransientRate::full;
};

struct BlockResult {
  Eigen::Matrix2d C = Eigen::Matrix2d::Zero();
  double error = 0.0;          // quadrature error estimate (max norm)
  double imag_residue = 0.0;   // largest imaginary part left after integration
};

/// Integrand over phi in [0, pi] whose integral is C_d: components
/// (Re C00, Re C01, Re C10, Re C11, Im C00, Im C01, Im C10, Im C11).
/// Time kind with full rate rotates the equal-time kernel by V_phi; all
/// other kinds use the equivalent closed real integrand.
QVec covariance_integrand(const CovRequest& req, double phi);

/// Generic driver over the request kind; validates closed-form preconditions.
BlockResult covariance_block(const CovRequest& req, const QuadratureSpec& quad);

BlockResult covariance_time(double h, const CouplingProfile& profile, const BathSpec& spec,
                            const QuadratureSpec& quad, int d, double t, double t_in = 0.0,
                            TransientRate rate = TransientRate::full);
BlockResult covariance_steady(double h, const CouplingProfile& profile, const BathSpec& spec,
                              const QuadratureSpec& quad, int d);
/// Beyond |d| = max_displacement the large-distance asymptotic form is returned.
BlockResult covariance_steady_weak(double h, const QuadratureSpec& quad, int d);
BlockResult ground_state_covariance(double h, const QuadratureSpec& quad, int d);

struct SameSite {
  double value;
  double derivative;  // with respect to |h|
};

/// 1/2 for |h| < 1, 1 - 1/(2h^2) for |h| > 1; throws AtCriticalPoint at |h| = 1.
SameSite same_site_closed_form(double h);

/// Weak-coupling same-site entry by quadrature.
double same_site_quadrature(double h, const QuadratureSpec& quad);

/// Central difference of the same-site quadrature with half-width `step`.
double same_site_derivative(double h, const QuadratureSpec& quad, double step = 5e-4);

/// Large-|L| tail of the weak-coupling steady block.
Eigen::Matrix2d asymptotic_offdiag(double h, int L);

struct FitRange {
  int L_min = 20;
  int L_max = 60;
  int step = 1;
};

struct CorrelationFit {
  double xi;
  double slope;
  double intercept;  // ln of the fitted prefactor magnitude
  int points;
};

/// Least-squares fit of ln|C| vs L on the weak-coupling steady entry
/// (C01 for |h| < 1, C10 for |h| > 1). Throws UnderflowRange below 1e-13.
CorrelationFit correlation_fit(double h, const QuadratureSpec& quad, FitRange range = {});
double correlation_length(double h, const QuadratureSpec& quad, FitRange range = {});

struct CriticalityReport {
  std::vector<double> h_scan;
  std::vector<double> same_site_value;
  std::vector<double> derivative_estimate;
  double jump_location = 0.0;
  double jump_size = 0.0;
  std::vector<double> correlation_length;  // NaN where undefined (h = 0, |h| = 1, underflow)
};

struct CriticalityPoint {
  double h = 0.0;
  double value = 0.0;
  double derivative = 0.0;
  double xi = 0.0;  // NaN where undefined
};

/// One scan point: same-site value, derivative at |h| and correlation length.
CriticalityPoint criticality_point(double h, const QuadratureSpec& quad,
                                   const std::optional<std::pair<CouplingProfile, BathSpec>>& bath,
                                   double delta = 1e-3, FitRange range = {});

/// Collects scan points in order and locates the derivative jump.
CriticalityReport assemble_criticality(
    const std::vector<CriticalityPoint>& points, const QuadratureSpec& quad,
    const std::optional<std::pair<CouplingProfile, BathSpec>>& bath, double delta = 1e-3);

/// Same-site value from covariance_steady (or the weak formula when `bath` is empty).
CriticalityReport criticality_scan(const std::vector<double>& hs, const QuadratureSpec& quad,
                                   const std::optional<std::pair<CouplingProfile, BathSpec>>& bath,
                                   double delta = 1e-3, FitRange range = {});

}  // namespace dk
