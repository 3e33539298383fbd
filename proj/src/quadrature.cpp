#include "dk/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace dk {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
using G10 = boost::math::quadrature::gauss<double, 10>;
using G20 = boost::math::quadrature::gauss<double, 20>;

struct Panel {
  double a, b;
  QVec value;
  double error;
  bool operator<(const Panel& o) const {
    if (error != o.error) return error < o.error;
    return a > o.a;
  }
};

Panel gk21(const VecIntegrand& f, int dim, double a, double b) {
  const auto& x = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G10::weights();
  const double c = 0.5 * (a + b);
  const double r = 0.5 * (b - a);
  QVec k = QVec::Zero(dim);
  QVec g = QVec::Zero(dim);
  k += wk[0] * f(c);
  for (std::size_t i = 1; i < x.size(); ++i) {
    const QVec s = f(c - r * x[i]) + f(c + r * x[i]);
    k += wk[i] * s;
    if (i % 2 == 1) g += wg[i / 2] * s;
  }
  Panel p{a, b, r * k, 0.0};
  p.error = (r * (k - g)).cwiseAbs().maxCoeff();
  return p;
}

QVec gauss_panel(const VecIntegrand& f, int dim, double a, double b) {
  const auto& x = G20::abscissa();
  const auto& w = G20::weights();
  const double c = 0.5 * (a + b);
  const double r = 0.5 * (b - a);
  QVec s = QVec::Zero(dim);
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * (f(c - r * x[i]) + f(c + r * x[i]));
  return r * s;
}

std::vector<double> breakpoints(double a, double b, const std::vector<double>& splits) {
  std::vector<double> pts{a};
  for (double s : splits)
    if (s > a && s < b) pts.push_back(s);
  pts.push_back(b);
  return pts;
}

QuadResult integrate_gauss(const VecIntegrand& f, int dim, double a, double b,
                           const QuadratureSpec& spec) {
  const auto pts = breakpoints(a, b, spec.split_points);
  QuadResult fine{QVec::Zero(dim), 0.0, 0};
  QVec coarse = QVec::Zero(dim);
  const int n = spec.gauss_panels;
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    const double h = (pts[s + 1] - pts[s]) / n;
    for (int k = 0; k < n; ++k) fine.value += gauss_panel(f, dim, pts[s] + k * h, pts[s] + (k + 1) * h);
    const double h2 = 2.0 * h;
    for (int k = 0; k < n / 2; ++k)
      coarse += gauss_panel(f, dim, pts[s] + k * h2, std::min(pts[s + 1], pts[s] + (k + 1) * h2));
    if (n % 2 == 1) coarse += gauss_panel(f, dim, pts[s] + (n - 1) * h, pts[s + 1]);
    fine.intervals += n;
  }
  fine.error = (fine.value - coarse).cwiseAbs().maxCoeff();
  return fine;
}

QuadResult integrate_adaptive(const VecIntegrand& f, int dim, double a, double b,
                              const QuadratureSpec& spec) {
  const auto pts = breakpoints(a, b, spec.split_points);
  std::priority_queue<Panel> heap;
  QVec total = QVec::Zero(dim);
  double err = 0.0;
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    Panel p = gk21(f, dim, pts[s], pts[s + 1]);
    total += p.value;
    err += p.error;
    heap.push(std::move(p));
  }
  int subdivisions = 0;
  auto target = [&] { return std::max(spec.abs_tol, spec.rel_tol * total.cwiseAbs().maxCoeff()); };
  while (err > target()) {
    if (subdivisions >= spec.max_subdivisions || heap.empty()) {
      std::ostringstream os;
      os << "adaptive quadrature did not reach tolerance after " << subdivisions
         << " subdivisions (estimated error " << err << ")";
      throw QuadratureFailure(os.str(), total.size() ? total(0) : 0.0, err);
    }
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      std::ostringstream os;
      os << "interval [" << worst.a << ", " << worst.b << "] cannot be bisected further";
      throw QuadratureFailure(os.str(), total(0), err);
    }
    Panel left = gk21(f, dim, worst.a, mid);
    Panel right = gk21(f, dim, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++subdivisions;
  }
  // Re-sum from the panels so roundoff from incremental updates does not accumulate.
  std::vector<Panel> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  QuadResult out{QVec::Zero(dim), 0.0, static_cast<int>(panels.size())};
  for (const auto& p : panels) {
    out.value += p.value;
    out.error += p.error;
  }
  if (!out.value.allFinite()) throw QuadratureFailure("integrand produced non-finite values", 0.0, out.error);
  return out;
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
    throw Error(ErrorKind::Config, "quadrature tolerances must be positive");
  if (max_subdivisions < 1) throw Error(ErrorKind::Config, "max_subdivisions must be >= 1");
  if (gauss_panels < 1) throw Error(ErrorKind::Config, "gauss_panels must be >= 1");
  for (std::size_t i = 1; i < split_points.size(); ++i)
    if (!(split_points[i] > split_points[i - 1]))
      throw Error(ErrorKind::Config, "split points must be strictly increasing");
}

QuadResult integrate(const VecIntegrand& f, int dim, double a, double b, const QuadratureSpec& spec) {
  spec.validate();
  if (dim < 1 || dim > 8) throw Error(ErrorKind::ShapeMismatch, "integrand dimension must be 1..8");
  if (a == b) return QuadResult{QVec::Zero(dim), 0.0, 0};
  if (spec.method == QuadMethod::gauss) return integrate_gauss(f, dim, a, b, spec);
  return integrate_adaptive(f, dim, a, b, spec);
}

ScalarQuadResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec) {
  const QuadResult r = integrate(
      [&](double x) {
        QVec v(1);
        v(0) = f(x);
        return v;
      },
      1, a, b, spec);
  return {r.value(0), r.error, r.intervals};
}

std::vector<double> critical_split_points(double h) {
  const double delta = std::abs(std::abs(h) - 1.0);
  constexpr double pi = std::numbers::pi;
  std::vector<double> out;
  if (delta >= 0.1) return out;
  // Gap closes at phi = pi for h > 0 and at phi = 0 for h < 0.
  for (double k : {10.0, 3.0, 1.0, 0.3, 0.1}) {
    const double off = k * std::max(delta, 1e-8);
    if (off >= pi) continue;
    out.push_back(h > 0 ? pi - off : off);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

QuadratureSpec with_critical_splits(const QuadratureSpec& spec, double h) {
  if (!spec.auto_critical_splits) return spec;
  QuadratureSpec out = spec;
  const auto extra = critical_split_points(h);
  out.split_points.insert(out.split_points.end(), extra.begin(), extra.end());
  std::sort(out.split_points.begin(), out.split_points.end());
  out.split_points.erase(std::unique(out.split_points.begin(), out.split_points.end()),
                         out.split_points.end());
  return out;
}

}  // namespace dk
