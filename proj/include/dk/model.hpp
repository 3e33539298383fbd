#pragma once

// Kitaev / transverse-field Ising chain with w = -Delta = 1, mu = 2h.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "dk/quadratic_core.hpp"

namespace dk {

enum class Boundary { antiperiodic, periodic };

struct KitaevParams {
  double h = 0.0;
  int N = 2;
  Boundary boundary = Boundary::antiperiodic;
};

/// Single-mode spectral data. theta itself is never formed.
struct DispersionPoint {
  double phi = 0.0;
  double epsilon = 0.0;
  double cos2theta = 1.0;
  double sin2theta = 0.0;

  double cos_sq() const noexcept { return 0.5 * (1.0 + cos2theta); }
  double sin_sq() const noexcept { return 0.5 * (1.0 - cos2theta); }
};

/// Real-space coupling matrix. The antiperiodic sector negates the wrap bond.
AntisymmetricMatrix build_A_matrix(const KitaevParams& params);

/// eps = |h + e^{i phi}|; at eps = 0 the angle is taken as cos2theta = -sign(h), sin2theta = 0.
DispersionPoint dispersion(double h, double phi);

/// phi_m = 2 pi (m + kappa) / N mapped to (-pi, pi]; kappa = 1/2 antiperiodic, 0 periodic.
std::vector<double> momentum_grid(int N, Boundary sector);

/// -(i/2) [[0, h + e^{-i phi}], [-(h + e^{i phi}), 0]].
Eigen::Matrix2cd a_phi_matrix(double h, double phi);

/// V = (1/sqrt 2) [[1, 1], [-i, i]] exp(-i theta sigma_x); V diag(eps, -eps) V^dagger = -2 A_phi.
Eigen::Matrix2cd v_phi_matrix(const DispersionPoint& p);

}  // namespace dk
