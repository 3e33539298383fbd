#include "dk/bath.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dk {

namespace {
constexpr double pi = std::numbers::pi;
}

CouplingProfile::CouplingProfile(std::map<int, double> coefficients) : g_(std::move(coefficients)) {
  for (const auto& [d, g] : g_) {
    if (!std::isfinite(g)) throw Error(ErrorKind::AsymmetricCoupling, "non-finite coupling");
    if (at(-d) != g) {
      std::ostringstream os;
      os << "g_" << d << " = " << g << " but g_" << -d << " = " << at(-d);
      throw Error(ErrorKind::AsymmetricCoupling, os.str());
    }
  }
}

double CouplingProfile::at(int d) const {
  auto it = g_.find(d);
  return it == g_.end() ? 0.0 : it->second;
}

int CouplingProfile::radius() const noexcept {
  int r = 0;
  for (const auto& [d, g] : g_)
    if (g != 0.0) r = std::max(r, std::abs(d));
  return r;
}

double g_tilde(const CouplingProfile& profile, double phi) {
  double sum = profile.at(0);
  for (const auto& [d, g] : profile.coefficients())
    if (d > 0) sum += 2.0 * g * std::cos(phi * d);
  return sum / std::sqrt(2.0 * pi);
}

double validate_positivity(const CouplingProfile& profile, int resolution) {
  resolution = std::max(resolution, 2);
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < resolution; ++k) m = std::min(m, g_tilde(profile, pi * k / (resolution - 1)));
  return m;
}

void BathSpec::validate() const {
  if (!(Gamma >= 0.0) || !std::isfinite(Gamma))
    throw Error(ErrorKind::Config, "Gamma must be finite and >= 0");
  if (!std::isfinite(deltaE)) throw Error(ErrorKind::Config, "deltaE must be finite");
  if (!(b >= 0.0 && b <= 1.0)) throw Error(ErrorKind::Config, "b must lie in [0, 1]");
  if (!(beta >= 0.0)) throw Error(ErrorKind::Config, "beta must be >= 0 (or infinite)");
}

SpectralDensity SpectralDensity::flat(double D0, double lo, double hi) {
  if (!(hi > lo)) throw Error(ErrorKind::Config, "flat density needs hi > lo");
  return {"flat", [D0](double) { return D0; }, lo, hi};
}

SpectralDensity SpectralDensity::lorentzian(double E0, double eta, double amp) {
  if (!(eta > 0.0)) throw Error(ErrorKind::Config, "Lorentzian width must be positive");
  return {"lorentzian",
          [=](double E) { return amp * eta / (pi * ((E - E0) * (E - E0) + eta * eta)); }, 0.0,
          std::numeric_limits<double>::infinity()};
}

SpectralDensity SpectralDensity::power_law(double alpha, double s, double cutoff) {
  if (!(cutoff > 0.0)) throw Error(ErrorKind::Config, "power-law cutoff must be positive");
  return {"power_law", [=](double E) { return alpha * std::pow(E, s) * std::exp(-E / cutoff); }, 0.0,
          std::numeric_limits<double>::infinity()};
}

BathSpec markov_params(const SpectralDensity& D, double eS, double beta, const QuadratureSpec& quad) {
  if (!(eS > D.lo && eS < D.hi)) {
    std::ostringstream os;
    os << "system energy " << eS << " must lie strictly inside the density support";
    throw Error(ErrorKind::SingularDensity, os.str());
  }
  const double d0 = D.D(eS);
  if (!std::isfinite(d0)) throw Error(ErrorKind::SingularDensity, "density is singular at the system energy");

  QuadratureSpec q = quad;
  q.split_points.clear();
  q.auto_critical_splits = false;

  // Pair E = eS +- u over the widest symmetric interval; only one-sided tails remain.
  double window = eS - D.lo;
  if (std::isfinite(D.hi)) window = std::min(window, D.hi - eS);
  double pv = integrate([&](double u) { return (D.D(eS + u) - D.D(eS - u)) / u; }, 0.0, window, q).value;
  const double left = eS - window, a = eS + window;
  if (left > D.lo) pv += integrate([&](double E) { return D.D(E) / (E - eS); }, D.lo, left, q).value;
  if (std::isfinite(D.hi)) {
    if (D.hi > a) pv += integrate([&](double E) { return D.D(E) / (E - eS); }, a, D.hi, q).value;
  } else {
    // E = a + x / (1 - x) maps [0, 1) onto [a, inf).
    pv += integrate(
              [&](double x) {
                const double om = 1.0 - x;
                const double E = a + x / om;
                return D.D(E) / (E - eS) / (om * om);
              },
              0.0, 1.0, q)
              .value;
  }
  if (!std::isfinite(pv)) throw Error(ErrorKind::SingularDensity, "principal value diverged");

  BathSpec out;
  out.Gamma = 2.0 * pi * d0;
  out.deltaE = pv;
  out.beta = beta;
  if (std::isinf(beta)) {
    out.b = 0.0;
  } else if (beta < 0.0) {
    throw Error(ErrorKind::Config, "beta must be >= 0");
  } else {
    const double x = beta * eS;
    out.b = x > 700.0 ? 0.0 : 1.0 / (1.0 + std::exp(x));
  }
  return out;
}

std::complex<double> DeltaElements::operator()(int P, int Q) const {
  if (P > 0) return Q > 0 ? pp : pm;
  return Q > 0 ? mp : mm;
}

DeltaElements delta_elements(const BathSpec& s) {
  using cd = std::complex<double>;
  const double diag = s.Gamma * (0.5 - s.b);
  return {cd(diag, -s.deltaE), cd(diag, s.deltaE), cd(-s.Gamma * s.b, 0.0),
          cd(s.Gamma * (1.0 - s.b), 0.0)};
}

DissipationCoefficients dissipation_kernel_markov(const DispersionPoint& disp, double gt,
                                                  const BathSpec& spec, KernelPath path) {
  if (path == KernelPath::closed_form && (spec.b != 0.0 || spec.deltaE != 0.0)) {
    std::ostringstream os;
    os << "closed forms require b = 0 and deltaE = 0 (got b = " << spec.b
       << ", deltaE = " << spec.deltaE << ")";
    throw Error(ErrorKind::UnsupportedClosedForm, os.str());
  }
  using cd = std::complex<double>;
  const double c2 = disp.cos_sq();
  const double s = disp.sin_sq();
  const double s2 = disp.sin2theta;
  DissipationCoefficients out;
  out.A = gt * 0.5 * spec.Gamma * disp.cos2theta;
  out.B = gt * 0.5 * spec.Gamma * s2;
  out.g_gamma_sin2 = spec.Gamma * gt * s;
  out.g_gamma_cos2 = spec.Gamma * gt * c2;

  const DeltaElements de = delta_elements(spec);
  const int sign[2] = {+1, -1};
  for (int P = 0; P < 2; ++P)
    for (int Q = 0; Q < 2; ++Q) {
      const cd dpq = de(sign[P], sign[Q]);
      const cd dqp = de(sign[Q], sign[P]);
      auto idx = [&](int u, int v) { return ((u * 2 + v) * 2 + P) * 2 + Q; };
      out.K[idx(0, 0)] = gt * (dpq * c2 - dqp * s);
      out.K[idx(1, 1)] = gt * (dpq * s - dqp * c2);
      out.K[idx(0, 1)] = cd(0.0, -0.5) * gt * (dpq + dqp) * s2;
      out.K[idx(1, 0)] = cd(0.0, 0.5) * gt * (dpq + dqp) * s2;
    }
  return out;
}

}  // namespace dk
