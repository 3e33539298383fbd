#pragma once

// Brute-force references: direct integration of the coupled single-mode
// Green's systems (any b, deltaE) and discrete-momentum chain sums.

#include <string>
#include <vector>

#include "dk/covariance.hpp"
#include "dk/greens.hpp"

namespace dk {

enum class OdeVariant {
  causal,     // pinned at t_in, bounded after the source
  unbounded,  // bounded on both sides of the source, no initial time
};

struct OdeRun {
  ModeContext ctx;      // disp, gtilde and t_in are used; the bath rate comes from `spec`
  BathSpec spec{};
  std::vector<double> t_grid;  // increasing; must start at t_in for the causal variant
  double tolerance = 1e-10;
  OdeVariant variant = OdeVariant::causal;
};

/// 4x4 generator of one tetrad: tetrad 0 holds (L00+, L00-, L10+, L10-),
/// tetrad 1 holds (L11+, L11-, L01+, L01-); d/dt x = M x away from t = t'.
Eigen::Matrix4cd tetrad_generator(const ModeContext& ctx, const BathSpec& spec, int tetrad);

/// L(t_+, t'_+) on every grid point; at t = t' the mean of both one-sided limits.
std::vector<GreensBlock> ode_greens(const OdeRun& run, double tp);

/// (2/N) sum over phi_m in (0, pi] of the covariance summand (h taken from params).
Eigen::Matrix2d finite_chain_covariance(const KitaevParams& params, CovRequest req);

struct ComparisonReport {
  std::string label;
  double max_abs_deviation = 0.0;
  std::size_t index = 0;
  std::string location;
  double threshold = 0.0;
  bool pass = true;
};

/// Max-abs deviation between equal-length lists; throws ShapeMismatch otherwise.
ComparisonReport compare(const std::string& label, const std::vector<double>& reference,
                         const std::vector<double>& candidate, double threshold,
                         const std::vector<std::string>& locations = {});

/// Closed-form kernels against ode_greens for one field and coupling, over
/// `momenta` points in (0, pi) and t in [0, 10/(g~ Gamma)].
struct GreensOracleSettings {
  double h = 0.5;
  double g_gamma_half = 0.3;  // g~ Gamma / 2, local coupling
  int momenta = 32;
  int times = 11;
  double tolerance = 1e-12;
  double threshold = 1e-6;
};
ComparisonReport greens_oracle(const GreensOracleSettings& s);

}  // namespace dk
