#include "dk/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <boost/numeric/odeint.hpp>

namespace dk {

namespace {

using cd = std::complex<double>;
using State = std::array<cd, 4>;
namespace odeint = boost::numeric::odeint;

constexpr cd I(0.0, 1.0);

// First Majorana index of each tetrad component and its branch (0 = +, 1 = -).
constexpr int flavor_of[2][4] = {{0, 0, 1, 1}, {1, 1, 0, 0}};
constexpr int branch_of[4] = {0, 1, 0, 1};
// Components left free at t_in in the causal variant; the others start at zero.
constexpr int free_comp[2][2] = {{1, 3}, {0, 3}};

Eigen::Vector4cd to_vec(const State& s) { return Eigen::Vector4cd(s[0], s[1], s[2], s[3]); }
State to_state(const Eigen::Vector4cd& v) { return {v(0), v(1), v(2), v(3)}; }

struct Tetrad {
  Eigen::Matrix4cd M;
  Eigen::Matrix<cd, 2, 4> R;  // rows spanning the left-invariant growing subspace
  Eigen::Matrix<cd, 4, 2> Vg; // growing right eigenvectors
  Eigen::Matrix<cd, 4, 2> Vd; // decaying right eigenvectors
  bool dissipative = false;
};

Tetrad make_tetrad(const ModeContext& ctx, const BathSpec& spec, int k) {
  Tetrad t;
  t.M = tetrad_generator(ctx, spec, k);
  t.R.setZero();
  t.R(0, 0) = 1.0;
  t.R(0, 1) = -1.0;
  t.R(1, 2) = 1.0;
  t.R(1, 3) = -1.0;
  t.dissipative = std::abs(ctx.gtilde) * spec.Gamma > 1e-14;
  // span(R) must be left-invariant: R M = X R for some 2x2 X.
  const Eigen::Matrix<cd, 2, 4> RM = t.R * t.M;
  Eigen::Matrix2cd X;
  X << RM(0, 0), RM(0, 2), RM(1, 0), RM(1, 2);
  if ((RM - X * t.R).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + t.M.cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::IntegrationFailure, "growing subspace is not invariant for this kernel");
  if (t.dissipative) {
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(t.M);
    std::array<int, 4> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      return es.eigenvalues()(a).real() > es.eigenvalues()(b).real();
    });
    if (!(es.eigenvalues()(idx[1]).real() > 0.0 && es.eigenvalues()(idx[2]).real() < 0.0))
      throw Error(ErrorKind::IntegrationFailure, "generator lacks a growing/decaying split");
    for (int c = 0; c < 2; ++c) {
      t.Vg.col(c) = es.eigenvectors().col(idx[c]);
      t.Vd.col(c) = es.eigenvectors().col(idx[2 + c]);
    }
  }
  return t;
}

class Integrator {
 public:
  Integrator(const Eigen::Matrix4cd& M, double tol) : M_(M), tol_(tol) {}

  void advance(State& x, double t0, double t1) const {
    if (t0 == t1) return;
    auto rhs = [this](const State& s, State& ds, double) {
      for (int i = 0; i < 4; ++i) {
        cd acc = 0.0;
        for (int j = 0; j < 4; ++j) acc += M_(i, j) * s[j];
        ds[i] = acc;
      }
    };
    auto stepper = odeint::make_controlled(tol_, tol_, odeint::runge_kutta_dopri5<State>());
    const double dt = (t1 > t0 ? 1.0 : -1.0) * std::min(0.01, std::abs(t1 - t0));
    try {
      odeint::integrate_adaptive(stepper, rhs, x, t0, t1, dt);
    } catch (const std::exception& e) {
      throw Error(ErrorKind::IntegrationFailure, std::string("stepper failed: ") + e.what());
    }
    for (const cd& v : x)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw Error(ErrorKind::IntegrationFailure, "state became non-finite");
  }

 private:
  Eigen::Matrix4cd M_;
  double tol_;
};

// Projector onto the decaying subspace along the growing one, and its complement.
Eigen::Matrix4cd growing_projector(const Tetrad& t) {
  return t.Vg * (t.R * t.Vg).inverse() * t.R;
}

// Trajectory of one tetrad; returns the state at every grid point (mean at t = tp).
std::vector<Eigen::Vector4cd> run_tetrad(const OdeRun& run, double tp, int k) {
  const Tetrad tet = make_tetrad(run.ctx, run.spec, k);
  const Integrator integ(tet.M, run.tolerance);
  const auto& grid = run.t_grid;
  const Eigen::Vector4cd src(-I, 0.0, 0.0, 0.0);
  std::vector<Eigen::Vector4cd> out(grid.size());

  Eigen::Vector4cd left, right;  // x(tp-), x(tp+)
  Eigen::Matrix4cd Pdec = Eigen::Matrix4cd::Identity();
  Eigen::Matrix4cd Pgro = Eigen::Matrix4cd::Zero();
  if (tet.dissipative) {
    Pgro = growing_projector(tet);
    Pdec = Eigen::Matrix4cd::Identity() - Pgro;
  }

  if (run.variant == OdeVariant::causal) {
    const double t_in = run.ctx.t_in;
    // Shoot on the two free initial components so that R x(tp+) = 0.
    Eigen::Matrix<cd, 4, 2> Phi_E;
    for (int c = 0; c < 2; ++c) {
      State x{};
      x[free_comp[k][c]] = 1.0;
      integ.advance(x, t_in, tp);
      Phi_E.col(c) = to_vec(x);
    }
    const Eigen::Vector2cd u = (tet.R * Phi_E).fullPivLu().solve(-tet.R * src);
    Eigen::Vector4cd x0 = Eigen::Vector4cd::Zero();
    x0(free_comp[k][0]) = u(0);
    x0(free_comp[k][1]) = u(1);

    State x = to_state(x0);
    double tc = t_in;
    std::size_t i = 0;
    for (; i < grid.size() && grid[i] < tp; ++i) {
      integ.advance(x, tc, grid[i]);
      tc = grid[i];
      out[i] = to_vec(x);
    }
    integ.advance(x, tc, tp);
    left = to_vec(x);
    right = left + src;
    if (tet.dissipative) right = Pdec * right;
  } else {
    if (!tet.dissipative)
      throw Error(ErrorKind::IntegrationFailure, "unbounded variant needs g~ Gamma > 0");
    Eigen::Matrix4cd S;
    S << tet.Vd, -tet.Vg;
    const Eigen::Vector4cd c = S.fullPivLu().solve(src);
    right = tet.Vd * c.head<2>();
    left = tet.Vg * c.tail<2>();
    State x = to_state(left);
    double tc = tp;
    // Backward from tp; growing modes decay in reverse time.
    for (std::size_t j = grid.size(); j-- > 0;) {
      if (!(grid[j] < tp)) continue;
      integ.advance(x, tc, grid[j]);
      tc = grid[j];
      Eigen::Vector4cd v = Pgro * to_vec(x);
      x = to_state(v);
      out[j] = v;
    }
  }

  State x = to_state(right);
  double tc = tp;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < tp) continue;
    if (grid[i] == tp) {
      out[i] = 0.5 * (left + right);
      continue;
    }
    integ.advance(x, tc, grid[i]);
    tc = grid[i];
    Eigen::Vector4cd v = to_vec(x);
    if (tet.dissipative) {
      v = Pdec * v;
      x = to_state(v);
    }
    out[i] = v;
  }
  return out;
}

}  // namespace

Eigen::Matrix4cd tetrad_generator(const ModeContext& ctx, const BathSpec& spec, int k) {
  const DissipationCoefficients dc =
      dissipation_kernel_markov(ctx.disp, ctx.gtilde, spec, KernelPath::general);
  const double eps = ctx.disp.epsilon;
  const double sigma[2] = {1.0, -1.0};
  Eigen::Matrix4cd M;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const int u = flavor_of[k][i], v = flavor_of[k][j];
      const int P = branch_of[i], Q = branch_of[j];
      cd m = -sigma[Q] * dc.kernel(u, v, P, Q);
      if (i == j) m += (u == 0 ? I : -I) * eps;
      M(i, j) = m;
    }
  return M;
}

std::vector<GreensBlock> ode_greens(const OdeRun& run, double tp) {
  run.spec.validate();
  if (!(run.tolerance > 0.0)) throw Error(ErrorKind::Config, "stepper tolerance must be positive");
  const auto& g = run.t_grid;
  if (g.empty()) throw Error(ErrorKind::Config, "time grid is empty");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) throw Error(ErrorKind::Config, "time grid must be strictly increasing");
  if (run.variant == OdeVariant::causal) {
    if (g.front() != run.ctx.t_in) throw Error(ErrorKind::Config, "time grid must start at t_in");
    if (tp < run.ctx.t_in) throw Error(ErrorKind::BeforeInitialTime, "source time precedes t_in");
  }
  if (tp < g.front() || tp > g.back()) throw Error(ErrorKind::Config, "source time outside the grid");

  const auto a = run_tetrad(run, tp, 0);
  const auto b = run_tetrad(run, tp, 1);
  std::vector<GreensBlock> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    GreensBlock& gb = out[i];
    gb.t = g[i];
    gb.tp = tp;
    gb.t_in = run.ctx.t_in;
    gb.L(0, 0) = a[i](0);
    gb.L(1, 0) = a[i](2);
    gb.L(1, 1) = b[i](0);
    gb.L(0, 1) = b[i](2);
  }
  return out;
}

Eigen::Matrix2d finite_chain_covariance(const KitaevParams& params, CovRequest req) {
  constexpr double pi = std::numbers::pi;
  req.h = params.h;
  const auto grid = momentum_grid(params.N, params.boundary);
  QVec acc = QVec::Zero(8);
  for (double phi : grid)
    if (phi > 0.0) acc += covariance_integrand(req, phi);
  acc *= 2.0 * pi / params.N;
  Eigen::Matrix2d C;
  C << acc(0), acc(1), acc(2), acc(3);
  return C;
}

ComparisonReport compare(const std::string& label, const std::vector<double>& reference,
                         const std::vector<double>& candidate, double threshold,
                         const std::vector<std::string>& locations) {
  if (reference.size() != candidate.size()) {
    std::ostringstream os;
    os << label << ": reference has " << reference.size() << " values, candidate "
       << candidate.size();
    throw Error(ErrorKind::ShapeMismatch, os.str());
  }
  ComparisonReport r;
  r.label = label;
  r.threshold = threshold;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double dev = std::abs(reference[i] - candidate[i]);
    if (dev > r.max_abs_deviation || std::isnan(dev)) {
      r.max_abs_deviation = std::isnan(dev) ? std::numeric_limits<double>::infinity() : dev;
      r.index = i;
    }
  }
  if (!reference.empty())
    r.location = (r.index < locations.size()) ? locations[r.index] : "index " + std::to_string(r.index);
  r.pass = r.max_abs_deviation <= threshold;
  return r;
}

ComparisonReport greens_oracle(const GreensOracleSettings& s) {
  constexpr double pi = std::numbers::pi;
  const double G = 2.0 * s.g_gamma_half;  // g~ Gamma with g~ = 1
  const double T = 10.0 / G;
  BathSpec spec;
  spec.Gamma = G;
  std::vector<double> ref, cand;
  std::vector<std::string> where;
  auto push = [&](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b, const std::string& tag) {
    for (int u = 0; u < 2; ++u)
      for (int v = 0; v < 2; ++v) {
        for (int part = 0; part < 2; ++part) {
          ref.push_back(part ? a(u, v).imag() : a(u, v).real());
          cand.push_back(part ? b(u, v).imag() : b(u, v).real());
          std::ostringstream os;
          os << tag << " L" << u << v << (part ? " im" : " re");
          where.push_back(os.str());
        }
      }
  };
  for (int m = 0; m < s.momenta; ++m) {
    const double phi = pi * (m + 0.5) / s.momenta;
    const ModeContext ctx{dispersion(s.h, phi), 1.0, G, 0.0};
    std::vector<double> grid(s.times);
    for (int i = 0; i < s.times; ++i) grid[i] = T * i / (s.times - 1);
    OdeRun run{ctx, spec, grid, s.tolerance, OdeVariant::causal};
    // Two-time kernels for sources inside the window, equal-time kernels on the grid.
    for (std::size_t k = 1; k < grid.size(); ++k) {
      const double tp = grid[k];
      const auto traj = ode_greens(run, tp);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        std::ostringstream tag;
        tag << "phi=" << phi << " t=" << grid[i] << " t'=" << tp;
        if (grid[i] == tp) {
          push(traj[i].L, greens_equal_time(ctx, tp).L, tag.str() + " equal-time");
        } else {
          push(traj[i].L, greens_causal(ctx, grid[i], tp).L, tag.str() + " causal");
        }
      }
    }
  }
  std::ostringstream label;
  label << "greens h=" << s.h << " gG/2=" << s.g_gamma_half;
  return compare(label.str(), ref, cand, s.threshold, where);
}

}  // namespace dk
