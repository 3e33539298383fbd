#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "dk/greens.hpp"

using namespace dk;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {

const cd I(0, 1);

ModeContext random_context(std::mt19937& rng) {
  std::uniform_real_distribution<double> uh(-2.5, 2.5), uphi(0.05, pi - 0.05), ug(0.05, 1.0);
  return ModeContext{dispersion(uh(rng), uphi(rng)), 1.0, 2.0 * ug(rng), uh(rng)};
}

double maxabs(const Eigen::Matrix2cd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("greens") {
  TEST_CASE("isolated two-time kernels") {
    const ModeContext ctx{dispersion(0.6, 1.0), 1.0, 0.0, 0.0};
    const double eps = ctx.disp.epsilon, c2 = ctx.disp.cos_sq(), s = ctx.disp.sin_sq();
    for (double tau : {-1.3, -0.2, 0.4, 2.0}) {
      const auto g = greens_unbounded(ctx, 3.0 + tau, 3.0);
      const cd ref = tau > 0 ? -I * c2 * std::exp(I * eps * tau) : I * s * std::exp(I * eps * tau);
      CHECK(std::abs(g.L(0, 0) - ref) < 1e-14);
      CHECK(std::abs(g.L(1, 0)) < 1e-15);
    }
  }

  TEST_CASE("sin 2theta = 0 removes the correction line") {
    const ModeContext ctx{dispersion(2.0, 0.0), 1.0, 0.6, 0.0};
    const auto g = greens_unbounded(ctx, 1.5, 1.0);
    const cd ref = -I * std::exp(I * 3.0 * 0.5 - 0.3 * 0.5);
    CHECK(std::abs(g.L(0, 0) - ref) < 1e-14);
  }

  TEST_CASE("unbounded kernel: theta(0) = 1/2 and L01 = L10") {
    std::mt19937 rng(21);
    for (int i = 0; i < 20; ++i) {
      const auto ctx = random_context(rng);
      const auto g = greens_unbounded(ctx, 1.0, 0.4);
      CHECK(g.L(0, 1) == g.L(1, 0));
      const auto e = greens_unbounded(ctx, 0.7, 0.7);
      const double w = std::pow(ctx.gtilde * ctx.Gamma / 2, 2) /
                       (std::pow(ctx.disp.epsilon, 2) + std::pow(ctx.gtilde * ctx.Gamma / 2, 2));
      const double S2 = std::pow(ctx.disp.sin2theta, 2);
      const cd ref = -0.5 * I * ctx.disp.cos_sq() + 0.5 * I * ctx.disp.sin_sq() -
                     0.5 * I * w * S2 * ctx.disp.cos_sq();
      CHECK(std::abs(e.L(0, 0) - ref) < 1e-14);
    }
  }

  TEST_CASE("boundary conditions at t_in") {
    std::mt19937 rng(22);
    std::uniform_real_distribution<double> u(0.01, 5.0);
    for (int i = 0; i < 200; ++i) {
      const auto ctx = random_context(rng);
      const double other = ctx.t_in + u(rng);
      const auto a = greens_causal(ctx, ctx.t_in, other);
      CHECK(std::abs(a.L(0, 0)) < 1e-12);
      CHECK(std::abs(a.L(0, 1)) < 1e-12);
      const auto b = greens_causal(ctx, other, ctx.t_in);
      CHECK(std::abs(b.L(1, 0)) < 1e-12);
      CHECK(std::abs(b.L(1, 1)) < 1e-12);
    }
  }

  TEST_CASE("times before t_in are rejected") {
    const ModeContext ctx{dispersion(0.5, 1.0), 1.0, 0.2, 1.0};
    try {
      greens_causal(ctx, 0.5, 2.0);
      FAIL("expected BeforeInitialTime");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::BeforeInitialTime);
    }
    CHECK_THROWS_AS(greens_equal_time(ctx, 0.9), Error);
    ModeContext neg = ctx;
    neg.gtilde = -0.1;
    CHECK_THROWS_AS(greens_causal(neg, 2.0, 2.0), Error);
  }

  TEST_CASE("memory loss: causal kernels approach the unbounded ones") {
    // Holds for the 00, 11 and 01 entries; the printed L10 carries an extra
    // bracket so it converges to zero instead.
    std::mt19937 rng(23);
    for (int i = 0; i < 40; ++i) {
      const auto ctx = random_context(rng);
      const double r = 0.5 * ctx.gtilde * ctx.Gamma;
      double K = 0.0;
      for (double shift : {5.0, 20.0, 60.0}) {
        const double t = ctx.t_in + shift + 0.7, tp = ctx.t_in + shift;
        const auto c = greens_causal(ctx, t, tp).L;
        const auto u = greens_unbounded(ctx, t, tp).L;
        double dev = 0.0;
        for (auto [a, b] : {std::pair{0, 0}, {1, 1}, {0, 1}}) dev = std::max(dev, std::abs(c(a, b) - u(a, b)));
        const double env = std::exp(-r * (t + tp - 2 * ctx.t_in));
        CHECK(dev <= 10.0 * env + 1e-14);
        if (env > 1e-8) K = std::max(K, dev / env);
      }
      CHECK(std::isfinite(K));
    }
  }

  TEST_CASE("causal kernels decay with separation") {
    const ModeContext ctx{dispersion(1.5, 0.9), 1.0, 0.6, 0.0};
    CHECK(maxabs(greens_causal(ctx, 80.0, 1.0).L) < 1e-9);
    CHECK(maxabs(greens_causal(ctx, 1.0, 80.0).L) < 1e-9);
  }

  TEST_CASE("equal-time kernel") {
    std::mt19937 rng(24);
    for (int i = 0; i < 100; ++i) {
      const auto ctx = random_context(rng);
      const auto at_in = greens_equal_time(ctx, ctx.t_in).L;
      CHECK(std::abs(at_in(0, 0) + 0.5 * I) < 1e-15);
      CHECK(std::abs(at_in(1, 1) - 0.5 * I) < 1e-15);
      const double t = ctx.t_in + 3.0;
      const auto e = greens_equal_time(ctx, t).L;
      CHECK(maxabs(e - greens_causal(ctx, t, t).L) < 1e-12);
      const Eigen::Matrix2cd herm = I * e;
      CHECK(maxabs(herm - herm.adjoint()) < 1e-12);
      CHECK(std::abs(e(0, 1)) == 0.0);
      CHECK(std::abs(e(1, 0)) == 0.0);
      CHECK(maxabs(greens_equal_time(ctx, ctx.t_in + 1e4).L - greens_steady(ctx)) < 1e-12);
    }
  }

  TEST_CASE("equal-time steady value") {
    // eps = 1, g~ Gamma / 2 = 0.5, cos 2theta = 0.
    const ModeContext ctx{DispersionPoint{0.0, 1.0, 0.0, 1.0}, 1.0, 1.0, 0.0};
    const auto L = greens_steady(ctx);
    const double corr = 0.5 * (0.25 / 1.25) * 0.5;
    CHECK(std::abs(L(0, 0) - (-I * corr)) < 1e-15);
    CHECK(std::abs(L(1, 1) - (-I * corr)) < 1e-15);
  }

  TEST_CASE("isolated equal-time kernel is stationary") {
    const ModeContext ctx{dispersion(0.3, 2.0), 1.0, 0.0, 0.0};
    Eigen::Matrix2cd ref = Eigen::Matrix2cd::Zero();
    ref(0, 0) = -0.5 * I;
    ref(1, 1) = 0.5 * I;
    for (double t : {0.0, 1.0, 100.0}) CHECK(maxabs(greens_equal_time(ctx, t).L - ref) < 1e-15);
  }

  TEST_CASE("half-rate variant") {
    const ModeContext ctx{dispersion(0.8, 1.0), 1.0, 0.4, 0.0};
    const auto full = greens_equal_time(ctx, 2.0, TransientRate::full).L;
    const auto half = greens_equal_time(ctx, 2.0, TransientRate::half).L;
    CHECK(maxabs(full - half) > 1e-3);
    CHECK(maxabs(greens_equal_time(ctx, 4.0, TransientRate::half).L - full) < 1e-14);
  }
}
