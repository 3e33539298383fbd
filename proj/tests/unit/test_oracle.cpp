#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "dk/oracle.hpp"

using namespace dk;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {

const cd I(0, 1);

std::vector<double> grid(double t0, double t1, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = t0 + (t1 - t0) * i / (n - 1);
  return g;
}

BathSpec rate(double G) {
  BathSpec b;
  b.Gamma = G;
  return b;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("isolated mode: free propagator phases") {
    const ModeContext ctx{dispersion(0.7, 1.2), 1.0, 0.0, 0.0};
    const double eps = ctx.disp.epsilon;
    const OdeRun run{ctx, rate(0.0), grid(0.0, 8.0, 33), 1e-12, OdeVariant::causal};
    const auto tr = ode_greens(run, 3.0);
    for (const auto& g : tr) {
      const double tau = g.t - g.tp;
      const double th = tau > 0 ? 1.0 : (tau < 0 ? 0.0 : 0.5);
      CHECK(std::abs(g.L(0, 0) - (-I * std::exp(I * eps * tau) * th)) < 1e-10);
      CHECK(std::abs(g.L(1, 1) - (I * std::exp(-I * eps * tau) * (1.0 - th))) < 1e-10);
      CHECK(std::abs(g.L(1, 0)) < 1e-10);
      CHECK(std::abs(g.L(0, 1)) < 1e-10);
      if (tau > 0) CHECK(std::abs(std::abs(g.L(0, 0)) - 1.0) < 1e-10);
    }
  }

  TEST_CASE("growing subspace is spanned by branch differences") {
    for (double b : {0.0, 0.3})
      for (double de : {0.0, 0.2}) {
        const ModeContext ctx{dispersion(1.4, 0.8), 0.9, 0.5, 0.0};
        const BathSpec spec{0.5, de, b};
        for (int k = 0; k < 2; ++k) {
          const Eigen::Matrix4cd M = tetrad_generator(ctx, spec, k);
          Eigen::Matrix<cd, 2, 4> R = Eigen::Matrix<cd, 2, 4>::Zero();
          R(0, 0) = 1.0;
          R(0, 1) = -1.0;
          R(1, 2) = 1.0;
          R(1, 3) = -1.0;
          const Eigen::Matrix<cd, 2, 4> RM = R * M;
          Eigen::Matrix2cd X;
          X << RM(0, 0), RM(0, 2), RM(1, 0), RM(1, 2);
          CHECK((RM - X * R).cwiseAbs().maxCoeff() < 1e-14);
          const Eigen::Vector2cd ev = X.eigenvalues();
          CHECK(ev(0).real() == doctest::Approx(0.5 * 0.9 * 0.5));
          CHECK(ev(1).real() == doctest::Approx(0.5 * 0.9 * 0.5));
        }
      }
  }

  TEST_CASE("boundary conditions of the causal solution") {
    const ModeContext ctx{dispersion(0.5, 1.1), 1.0, 0.6, 0.0};
    const OdeRun run{ctx, rate(0.6), grid(0.0, 6.0, 13), 1e-12, OdeVariant::causal};
    const auto tr = ode_greens(run, 2.0);
    CHECK(std::abs(tr[0].L(0, 0)) < 1e-10);
    CHECK(std::abs(tr[0].L(0, 1)) < 1e-10);
    CHECK(std::isfinite(std::abs(tr.back().L(1, 0))));
  }

  TEST_CASE("forward propagation matches the closed form without the correction line") {
    for (double h : {0.5, 2.0}) {
      const ModeContext ctx{dispersion(h, 0.9), 1.0, 0.6, 0.0};
      const double eps = ctx.disp.epsilon, c2 = ctx.disp.cos_sq(), s = ctx.disp.sin_sq();
      const OdeRun run{ctx, rate(0.6), grid(-6.0, 6.0, 25), 1e-12, OdeVariant::unbounded};
      for (const auto& g : ode_greens(run, 0.0)) {
        const double tau = g.t - g.tp;
        const double env = std::exp(-0.3 * std::abs(tau));
        const double th = tau > 0 ? 1.0 : (tau < 0 ? 0.0 : 0.5);
        const cd ref = -I * c2 * std::exp(I * eps * tau) * env * th +
                       I * s * std::exp(I * eps * tau) * env * (1.0 - th);
        CHECK(std::abs(g.L(0, 0).real() - ref.real()) < 1e-8);
      }
    }
  }

  TEST_CASE("equal-time diagonal matches the sigma_z part of the closed form") {
    const ModeContext ctx{dispersion(1.0, 2.0), 1.0, 0.6, 0.0};
    const auto g = grid(0.0, 10.0, 11);
    const OdeRun run{ctx, rate(0.6), g, 1e-12, OdeVariant::causal};
    for (std::size_t k = 1; k < g.size(); ++k) {
      const auto tr = ode_greens(run, g[k]);
      const double e = 1.0 - std::exp(-0.6 * g[k]);
      const cd bracket = 0.5 - ctx.disp.sin_sq() * e;
      CHECK(std::abs(tr[k].L(0, 0) - (-I * bracket)) < 1e-8);
      CHECK(std::abs(tr[k].L(1, 1) - (I * bracket)) < 1e-8);
    }
  }

  TEST_CASE("general bath: finite, decaying, translation invariant") {
    const BathSpec spec{0.5, 0.1, 0.2};
    const auto disp = dispersion(0.8, 1.0);
    auto late = [&](double t_in) {
      const ModeContext ctx{disp, 1.0, 0.5, t_in};
      const OdeRun run{ctx, spec, grid(t_in, t_in + 60.0, 61), 1e-11, OdeVariant::causal};
      return ode_greens(run, t_in + 60.0).back().L;
    };
    const Eigen::Matrix2cd a = late(0.0), b = late(5.0);
    CHECK(a.allFinite());
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);
    const ModeContext ctx{disp, 1.0, 0.5, 0.0};
    const auto tr = ode_greens(OdeRun{ctx, spec, grid(0.0, 60.0, 61), 1e-11, OdeVariant::causal}, 10.0);
    CHECK(tr.back().L.cwiseAbs().maxCoeff() < 1e-3);
  }

  TEST_CASE("unbounded variant needs dissipation; bad grids are rejected") {
    const ModeContext ctx{dispersion(0.8, 1.0), 1.0, 0.0, 0.0};
    try {
      ode_greens(OdeRun{ctx, rate(0.0), grid(-1, 1, 5), 1e-10, OdeVariant::unbounded}, 0.0);
      FAIL("expected IntegrationFailure");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::IntegrationFailure);
    }
    CHECK_THROWS_AS(ode_greens(OdeRun{ctx, rate(0.1), {0.0, 1.0, 0.5}, 1e-10}, 0.5), Error);
    CHECK_THROWS_AS(ode_greens(OdeRun{ctx, rate(0.1), {0.5, 1.0}, 1e-10}, 0.6), Error);
  }

  TEST_CASE("finite-chain sums") {
    QuadratureSpec q;
    CovRequest weak;
    weak.kind = CovKind::steady_weak;
    const auto big = finite_chain_covariance({0.5, 4096, Boundary::antiperiodic}, weak);
    CHECK(std::abs(big(0, 1) - 0.5) < 1e-6);
    const auto tiny = finite_chain_covariance({0.5, 2, Boundary::antiperiodic}, weak);
    CHECK(tiny.allFinite());

    CovRequest st;
    st.kind = CovKind::steady;
    st.bath.Gamma = 0.2 * std::sqrt(2.0 * pi);
    double worst = 0.0;
    for (int d = 0; d <= 20; ++d) {
      st.d = d;
      st.h = 1.2;
      const auto F = finite_chain_covariance({1.2, 512, Boundary::antiperiodic}, st);
      const auto C = covariance_steady(1.2, st.profile, st.bath, q, d).C;
      worst = std::max(worst, (F - C).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-3);
  }

  TEST_CASE("compare") {
    const auto same = compare("x", {1, 2, 3}, {1, 2, 3}, 0.0);
    CHECK(same.pass);
    CHECK(same.max_abs_deviation == 0.0);
    const auto off = compare("y", {1, 2, 3}, {1, 2 + 1e-5, 3}, 1e-6, {"a", "b", "c"});
    CHECK_FALSE(off.pass);
    CHECK(off.index == 1);
    CHECK(off.location == "b");
    try {
      compare("z", {1, 2}, {1}, 1.0);
      FAIL("expected ShapeMismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ShapeMismatch);
    }
  }
}
