#include "dk/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace dk {

namespace {
constexpr double pi = std::numbers::pi;
}

AntisymmetricMatrix build_A_matrix(const KitaevParams& params) {
  const int n = params.N;
  if (n < 2) {
    std::ostringstream os;
    os << "chain needs N >= 2, got " << n;
    throw Error(ErrorKind::InvalidChain, os.str());
  }
  AntisymmetricMatrix A = AntisymmetricMatrix::zeros(n);
  for (int j = 0; j < n; ++j) {
    A.add(MajoranaIndex{j, 0}.flat(), MajoranaIndex{j, 1}.flat(), -params.h);
    const int k = (j + 1) % n;
    const bool wrap = (j == n - 1);
    const double bond = (wrap && params.boundary == Boundary::antiperiodic) ? -1.0 : 1.0;
    A.add(MajoranaIndex{j, 1}.flat(), MajoranaIndex{k, 0}.flat(), bond);
  }
  return A;
}

DispersionPoint dispersion(double h, double phi) {
  DispersionPoint p;
  p.phi = phi;
  const double x = h + std::cos(phi);
  const double y = std::sin(phi);
  p.epsilon = std::hypot(x, y);
  if (p.epsilon == 0.0) {
    p.cos2theta = h > 0 ? -1.0 : 1.0;
    p.sin2theta = 0.0;
  } else {
    p.cos2theta = x / p.epsilon;
    p.sin2theta = y / p.epsilon;
  }
  return p;
}

std::vector<double> momentum_grid(int N, Boundary sector) {
  if (N < 2) throw Error(ErrorKind::InvalidChain, "momentum grid needs N >= 2");
  const double kappa = sector == Boundary::antiperiodic ? 0.5 : 0.0;
  std::vector<double> out(N);
  for (int m = 0; m < N; ++m) {
    double phi = 2.0 * pi * (m + kappa) / N;
    if (phi > pi) phi -= 2.0 * pi;
    out[m] = phi;
  }
  return out;
}

Eigen::Matrix2cd a_phi_matrix(double h, double phi) {
  using cd = std::complex<double>;
  const cd minus_half_i(0.0, -0.5);
  Eigen::Matrix2cd m;
  m << 0.0, h + std::polar(1.0, -phi), -(h + std::polar(1.0, phi)), 0.0;
  return minus_half_i * m;
}

Eigen::Matrix2cd v_phi_matrix(const DispersionPoint& p) {
  using cd = std::complex<double>;
  const double c = std::sqrt(std::max(0.0, p.cos_sq()));
  const double s = std::copysign(std::sqrt(std::max(0.0, p.sin_sq())),
                                 p.sin2theta == 0.0 ? 1.0 : p.sin2theta);
  Eigen::Matrix2cd base;
  base << 1.0, 1.0, cd(0, -1), cd(0, 1);
  Eigen::Matrix2cd rot;
  rot << c, cd(0, -s), cd(0, -s), c;
  return (1.0 / std::numbers::sqrt2) * base * rot;
}

}  // namespace dk
