#include "dk/covariance.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

namespace dk {

namespace {

constexpr double pi = std::numbers::pi;
using cd = std::complex<double>;

void check_closed_form(const CovRequest& req) {
  req.bath.validate();
  if (req.kind == CovKind::time || req.kind == CovKind::steady) {
    dissipation_kernel_markov(DispersionPoint{}, 0.0, req.bath, KernelPath::closed_form);
    if (validate_positivity(req.profile) < 0.0)
      throw Error(ErrorKind::UnsupportedClosedForm,
                  "coupling transform g~ changes sign; closed forms need g~ >= 0");
  }
  if (req.kind == CovKind::time && req.t < req.t_in) {
    std::ostringstream os;
    os << "t = " << req.t << " precedes t_in = " << req.t_in;
    throw Error(ErrorKind::BeforeInitialTime, os.str());
  }
  if (std::abs(req.d) > max_displacement) {
    std::ostringstream os;
    os << "|d| = " << std::abs(req.d) << " exceeds the quadrature cap " << max_displacement;
    throw Error(ErrorKind::Config, os.str());
  }
}

QVec pack(const Eigen::Matrix2d& re) {
  QVec v = QVec::Zero(8);
  v << re(0, 0), re(0, 1), re(1, 0), re(1, 1), 0.0, 0.0, 0.0, 0.0;
  return v;
}

// Real closed integrand; first bracket exponent e1 and correction exponent e2.
Eigen::Matrix2d closed_integrand(const DispersionPoint& p, double phi, int d, double e1, double e2,
                                 double gh) {
  const double c = p.cos2theta;
  const double s2 = p.sin2theta;
  const double cd_ = std::cos(phi * d);
  const double sd = std::sin(phi * d);
  const double cm = cd_ * c + sd * s2;  // cos(phi d - 2 theta)
  const double cp = cd_ * c - sd * s2;  // cos(phi d + 2 theta)
  const double den = p.epsilon * p.epsilon + gh * gh;
  const double W = (s2 == 0.0 || den == 0.0) ? 0.0 : gh * gh / den * s2 * s2;
  const double first = (2.0 / pi) * (0.5 - p.sin_sq() * e1);
  const double corr = W * e2 / (2.0 * pi);
  Eigen::Matrix2d m;
  m << corr * sd, first * cm + corr * cm * c, -first * cp - corr * cp * c, corr * sd;
  return m;
}

double transient(double rate, double dt) { return -std::expm1(-rate * dt); }

BlockResult finish(const QuadResult& r) {
  BlockResult out;
  out.C << r.value(0), r.value(1), r.value(2), r.value(3);
  out.imag_residue = r.value.tail(4).cwiseAbs().maxCoeff();
  out.error = r.error;
  return out;
}

}  // namespace

QVec covariance_integrand(const CovRequest& req, double phi) {
  const DispersionPoint p = dispersion(req.h, phi);
  const int d = req.d;
  switch (req.kind) {
    case CovKind::ground: {
      const double cm = std::cos(phi * d) * p.cos2theta + std::sin(phi * d) * p.sin2theta;
      const double cp = std::cos(phi * d) * p.cos2theta - std::sin(phi * d) * p.sin2theta;
      Eigen::Matrix2d m;
      m << 0.0, cm / pi, -cp / pi, 0.0;
      return pack(m);
    }
    case CovKind::steady_weak: {
      const double c = p.cos2theta;
      const double cm = std::cos(phi * d) * c + std::sin(phi * d) * p.sin2theta;
      const double cp = std::cos(phi * d) * c - std::sin(phi * d) * p.sin2theta;
      Eigen::Matrix2d m;
      m << 0.0, c * cm / pi, -c * cp / pi, 0.0;
      return pack(m);
    }
    case CovKind::steady: {
      const double gt = g_tilde(req.profile, phi);
      const double rate = std::abs(gt) * req.bath.Gamma;
      const double e = rate > 0.0 ? 1.0 : 0.0;
      return pack(closed_integrand(p, phi, d, e, e, gt * req.bath.Gamma / 2.0));
    }
    case CovKind::time: {
      const double gt = g_tilde(req.profile, phi);
      const double dt = req.t - req.t_in;
      if (req.rate == TransientRate::half) {
        const double rate = std::abs(gt) * req.bath.Gamma;
        return pack(closed_integrand(p, phi, d, transient(0.5 * rate, dt), transient(rate, dt),
                                     gt * req.bath.Gamma / 2.0));
      }
      const ModeContext ctx{p, gt, req.bath.Gamma, req.t_in};
      const Eigen::Matrix2cd L = greens_equal_time(ctx, req.t).L;
      const Eigen::Matrix2cd V = v_phi_matrix(p);
      const Eigen::Matrix2cd M = V * L * V.adjoint();
      const cd e = std::polar(1.0, phi * d);
      Eigen::Matrix2cd S;
      for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v) S(u, v) = (e * M(u, v) - std::conj(e) * M(v, u)) / pi;
      QVec out(8);
      out << S(0, 0).real(), S(0, 1).real(), S(1, 0).real(), S(1, 1).real(), S(0, 0).imag(),
          S(0, 1).imag(), S(1, 0).imag(), S(1, 1).imag();
      return out;
    }
  }
  return QVec::Zero(8);
}

BlockResult covariance_block(const CovRequest& req, const QuadratureSpec& quad) {
  check_closed_form(req);
  const QuadratureSpec q = with_critical_splits(quad, req.h);
  return finish(integrate([&](double phi) { return covariance_integrand(req, phi); }, 8, 0.0, pi, q));
}

BlockResult covariance_time(double h, const CouplingProfile& profile, const BathSpec& spec,
                            const QuadratureSpec& quad, int d, double t, double t_in,
                            TransientRate rate) {
  CovRequest r{CovKind::time, h, profile, spec, d, t, t_in, rate};
  return covariance_block(r, quad);
}

BlockResult covariance_steady(double h, const CouplingProfile& profile, const BathSpec& spec,
                              const QuadratureSpec& quad, int d) {
  CovRequest r{CovKind::steady, h, profile, spec, d};
  return covariance_block(r, quad);
}

BlockResult covariance_steady_weak(double h, const QuadratureSpec& quad, int d) {
  if (std::abs(d) > max_displacement) return BlockResult{asymptotic_offdiag(h, d), 0.0, 0.0};
  CovRequest r;
  r.kind = CovKind::steady_weak;
  r.h = h;
  r.d = d;
  return covariance_block(r, quad);
}

BlockResult ground_state_covariance(double h, const QuadratureSpec& quad, int d) {
  CovRequest r;
  r.kind = CovKind::ground;
  r.h = h;
  r.d = d;
  return covariance_block(r, quad);
}

SameSite same_site_closed_form(double h) {
  const double a = std::abs(h);
  if (a == 1.0)
    throw Error(ErrorKind::AtCriticalPoint, "same-site derivative is undefined at |h| = 1 (value 1/2)");
  if (a < 1.0) return {0.5, 0.0};
  return {1.0 - 1.0 / (2.0 * h * h), 1.0 / (a * a * a)};
}

double same_site_quadrature(double h, const QuadratureSpec& quad) {
  return covariance_steady_weak(h, quad, 0).C(0, 1);
}

double same_site_derivative(double h, const QuadratureSpec& quad, double step) {
  const double a = std::abs(h);
  return (same_site_quadrature(a + step, quad) - same_site_quadrature(a - step, quad)) / (2.0 * step);
}

Eigen::Matrix2d asymptotic_offdiag(double h, int L) {
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  const double a = std::abs(h);
  if (a == 1.0 || h == 0.0) return m;
  const double pref = (1.0 - h * h) / (2.0 * h * h);
  const int n = std::abs(L);
  if (L >= 0) {
    if (a < 1.0) m(0, 1) = pref * std::pow(-h, n);
    else m(1, 0) = pref * std::pow(-h, -n);
  } else {
    if (a < 1.0) m(1, 0) = -pref * std::pow(-h, n);
    else m(0, 1) = -pref * std::pow(-h, -n);
  }
  return m;
}

CorrelationFit correlation_fit(double h, const QuadratureSpec& quad, FitRange range) {
  const double a = std::abs(h);
  if (a == 1.0) throw Error(ErrorKind::AtCriticalPoint, "correlation length diverges at |h| = 1");
  if (range.step < 1 || range.L_max <= range.L_min)
    throw Error(ErrorKind::Config, "fit range needs L_max > L_min and step >= 1");
  constexpr double floor = 1e-13;
  QuadratureSpec q = quad;
  q.abs_tol = std::min(q.abs_tol, floor);
  std::vector<double> xs, ys;
  // Points are kept while they stay above the floor and well above the quadrature error.
  for (int L = range.L_min; L <= range.L_max; L += range.step) {
    const BlockResult r = covariance_steady_weak(h, q, L);
    const double v = std::abs(a < 1.0 ? r.C(0, 1) : r.C(1, 0));
    if (!(v > floor && v > 100.0 * r.error)) break;
    xs.push_back(L);
    ys.push_back(std::log(v));
  }
  if (xs.size() < 2) {
    std::ostringstream os;
    os << "covariance entries below " << floor << " across L in [" << range.L_min << ", "
       << range.L_max << "]";
    throw Error(ErrorKind::UnderflowRange, os.str());
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  if (!(slope < 0.0)) throw Error(ErrorKind::UnderflowRange, "entries do not decay over the fit range");
  return {-1.0 / slope, slope, my - slope * mx, static_cast<int>(xs.size())};
}

double correlation_length(double h, const QuadratureSpec& quad, FitRange range) {
  return correlation_fit(h, quad, range).xi;
}

namespace {

double scan_value(double h, const QuadratureSpec& quad,
                  const std::optional<std::pair<CouplingProfile, BathSpec>>& bath) {
  if (bath) return covariance_steady(h, bath->first, bath->second, quad, 0).C(0, 1);
  return same_site_quadrature(h, quad);
}

double scan_derivative(double a, const QuadratureSpec& quad,
                       const std::optional<std::pair<CouplingProfile, BathSpec>>& bath,
                       double delta) {
  const double k = 0.5 * delta;
  return (scan_value(a + k, quad, bath) - scan_value(a - k, quad, bath)) / (2.0 * k);
}

}  // namespace

CriticalityPoint criticality_point(double h, const QuadratureSpec& quad,
                                   const std::optional<std::pair<CouplingProfile, BathSpec>>& bath,
                                   double delta, FitRange range) {
  CriticalityPoint p;
  p.h = h;
  p.value = scan_value(h, quad, bath);
  p.derivative = scan_derivative(std::abs(h), quad, bath, delta);
  p.xi = std::numeric_limits<double>::quiet_NaN();
  if (h != 0.0 && std::abs(h) != 1.0) {
    try {
      p.xi = correlation_length(h, quad, range);
    } catch (const Error&) {
    }
  }
  return p;
}

CriticalityReport assemble_criticality(
    const std::vector<CriticalityPoint>& points, const QuadratureSpec& quad,
    const std::optional<std::pair<CouplingProfile, BathSpec>>& bath, double delta) {
  CriticalityReport rep;
  for (const auto& p : points) {
    rep.h_scan.push_back(p.h);
    rep.same_site_value.push_back(p.value);
    rep.derivative_estimate.push_back(p.derivative);
    rep.correlation_length.push_back(p.xi);
  }
  const auto& hs = rep.h_scan;
  if (hs.size() >= 2) {
    std::size_t best = 0;
    double best_jump = -1.0;
    for (std::size_t i = 0; i + 1 < hs.size(); ++i) {
      const double j = std::abs(rep.derivative_estimate[i + 1] - rep.derivative_estimate[i]);
      if (j > best_jump) {
        best_jump = j;
        best = i;
      }
    }
    rep.jump_location = 0.5 * (hs[best] + hs[best + 1]);
    // A point on the jump itself carries an intermediate estimate; prefer it.
    const auto& D = rep.derivative_estimate;
    double best_span = 0.0;
    for (std::size_t k = 1; k + 1 < hs.size(); ++k) {
      const double left = D[k] - D[k - 1], right = D[k + 1] - D[k], span = D[k + 1] - D[k - 1];
      const bool straddles = left * right > 0.0 && std::abs(left) >= 0.25 * std::abs(span) &&
                             std::abs(right) >= 0.25 * std::abs(span);
      if (straddles && std::abs(span) > best_jump && std::abs(span) > best_span) {
        best_span = std::abs(span);
        rep.jump_location = hs[k];
      }
    }
    rep.jump_size = scan_derivative(1.0 + delta, quad, bath, delta) -
                    scan_derivative(1.0 - delta, quad, bath, delta);
  } else if (!hs.empty()) {
    rep.jump_location = hs.front();
  }
  return rep;
}

CriticalityReport criticality_scan(const std::vector<double>& hs, const QuadratureSpec& quad,
                                   const std::optional<std::pair<CouplingProfile, BathSpec>>& bath,
                                   double delta, FitRange range) {
  std::vector<CriticalityPoint> points;
  for (double h : hs) points.push_back(criticality_point(h, quad, bath, delta, range));
  return assemble_criticality(points, quad, bath, delta);
}

}  // namespace dk
