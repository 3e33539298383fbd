#pragma once

// Closed-form single-mode Keldysh kernels L(t_+, t'_+) at b = 0, deltaE = 0.

#include <Eigen/Dense>

#include "dk/model.hpp"

namespace dk {

struct ModeContext {
  DispersionPoint disp;
  double gtilde = 0.0;  // >= 0 on the closed-form path
  double Gamma = 0.0;
  double t_in = 0.0;

  void validate() const;
  /// |g~| Gamma, the equal-time relaxation rate.
  double rate() const noexcept;
};

struct GreensBlock {
  Eigen::Matrix2cd L = Eigen::Matrix2cd::Zero();
  double t = 0.0;
  double tp = 0.0;
  double t_in = 0.0;
};

/// Which exponent the transient bracket of the equal-time kernel uses.
enum class TransientRate {
  full,  // |g~| Gamma
  half,  // |g~| Gamma / 2, compatibility variant
};

/// Particular solutions without boundary terms; theta(0) = 1/2, L01 = L10.
GreensBlock greens_unbounded(const ModeContext& ctx, double t, double tp);

/// Boundary-conditioned kernels with decaying transients; t, tp >= t_in.
GreensBlock greens_causal(const ModeContext& ctx, double t, double tp);

/// Equal-time kernel at t >= t_in.
GreensBlock greens_equal_time(const ModeContext& ctx, double t,
                              TransientRate rate = TransientRate::full);

/// t -> infinity limit of the equal-time kernel.
Eigen::Matrix2cd greens_steady(const ModeContext& ctx);

}  // namespace dk
