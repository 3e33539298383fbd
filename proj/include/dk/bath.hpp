#pragma once

// Bath side: real symmetric coupling profiles, spectral densities,
// Markovian parameters and the momentum-space dissipation kernel.

#include <array>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <string>

#include "dk/model.hpp"
#include "dk/quadrature.hpp"

namespace dk {

/// g_d for integer displacement d, finite support, g_d = g_{-d}.
class CouplingProfile {
 public:
  CouplingProfile() = default;
  /// Throws AsymmetricCoupling unless g_d = g_{-d} for every supplied d.
  explicit CouplingProfile(std::map<int, double> coefficients);

  static CouplingProfile local(double g) { return CouplingProfile({{0, g}}); }

  const std::map<int, double>& coefficients() const noexcept { return g_; }
  double at(int d) const;
  int radius() const noexcept;

 private:
  std::map<int, double> g_;
};

/// (1/sqrt(2 pi)) sum_d g_d e^{i phi d}, real by symmetry.
double g_tilde(const CouplingProfile& profile, double phi);

/// Minimum of g~ over `resolution` uniform points of [0, pi].
double validate_positivity(const CouplingProfile& profile, int resolution = 4096);

struct BathSpec {
  double Gamma = 0.1;
  double deltaE = 0.0;
  double b = 0.0;
  double beta = std::numeric_limits<double>::infinity();

  void validate() const;
};

/// D(E) >= 0 on [lo, hi]; hi may be +infinity.
struct SpectralDensity {
  std::string family;
  std::function<double(double)> D;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  /// D0 on [lo, hi].
  static SpectralDensity flat(double D0, double lo, double hi);
  /// amp * (1/pi) eta / ((E - E0)^2 + eta^2) on [0, inf).
  static SpectralDensity lorentzian(double E0, double eta, double amp = 1.0);
  /// alpha * E^s * exp(-E / cutoff) on [0, inf).
  static SpectralDensity power_law(double alpha, double s, double cutoff);
};

/// Gamma = 2 pi D(eS), deltaE = PV int D(E)/(E - eS) dE, b = 1/(1 + e^{beta eS}).
/// beta = +inf gives b = 0, beta = 0 gives b = 1/2.
BathSpec markov_params(const SpectralDensity& D, double epsilonS, double beta,
                       const QuadratureSpec& quad = {});

struct DeltaElements {
  std::complex<double> pp, mm, pm, mp;

  /// Delta_{PQ} with branch signs P, Q in {+1, -1}.
  std::complex<double> operator()(int P, int Q) const;
};

DeltaElements delta_elements(const BathSpec& spec);

enum class KernelPath { closed_form, general };

/// Coefficients of the coupled single-mode Green's systems.
struct DissipationCoefficients {
  double A = 0.0;            // g~ (Gamma/2) cos 2theta
  double B = 0.0;            // g~ (Gamma/2) sin 2theta
  double g_gamma_sin2 = 0.0; // Gamma g~ sin^2 theta
  double g_gamma_cos2 = 0.0; // Gamma g~ cos^2 theta
  /// K_{uv}(P, Q) of the Markovian kernel, indexed [u][v][P][Q] with 0 = +, 1 = -.
  std::array<std::complex<double>, 16> K{};

  std::complex<double> kernel(int u, int v, int P, int Q) const {
    return K[((u * 2 + v) * 2 + P) * 2 + Q];
  }
};

/// Closed-form path requires b = 0 and deltaE = 0 (UnsupportedClosedForm otherwise).
DissipationCoefficients dissipation_kernel_markov(const DispersionPoint& disp, double gtilde,
                                                  const BathSpec& spec,
                                                  KernelPath path = KernelPath::closed_form);

}  // namespace dk
