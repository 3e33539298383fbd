#include "dk/greens.hpp"

#include <cmath>
#include <complex>
#include <sstream>

namespace dk {

namespace {

using cd = std::complex<double>;
constexpr cd I(0.0, 1.0);

double heaviside(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? 0.0 : 0.5); }

// sin(eps x) / eps with the eps -> 0 limit.
double sin_over(double eps, double x) {
  if (std::abs(eps * x) < 1e-8) return x * (1.0 - (eps * x) * (eps * x) / 6.0);
  return std::sin(eps * x) / eps;
}

struct Shared {
  double eps, c2, s, S2, gh, half_rate, w;
};

Shared shared(const ModeContext& ctx) {
  Shared p;
  p.eps = ctx.disp.epsilon;
  p.c2 = ctx.disp.cos_sq();
  p.s = ctx.disp.sin_sq();
  p.S2 = ctx.disp.sin2theta * ctx.disp.sin2theta;
  p.gh = ctx.gtilde * ctx.Gamma / 2.0;
  p.half_rate = 0.5 * std::abs(ctx.gtilde) * ctx.Gamma;
  const double den = p.eps * p.eps + p.gh * p.gh;
  p.w = den > 0.0 ? p.gh * p.gh / den : 0.0;
  return p;
}

double oscillation(const Shared& p, double tau) {
  const double a = std::abs(tau);
  return std::cos(p.eps * a) + p.gh * sin_over(p.eps, a);
}

void check_times(const ModeContext& ctx, double t, double tp) {
  if (t < ctx.t_in || tp < ctx.t_in) {
    std::ostringstream os;
    os << "times (" << t << ", " << tp << ") precede t_in = " << ctx.t_in;
    throw Error(ErrorKind::BeforeInitialTime, os.str());
  }
}

}  // namespace

void ModeContext::validate() const {
  if (!(gtilde >= 0.0))
    throw Error(ErrorKind::UnsupportedClosedForm, "closed-form kernels require g~ >= 0");
  if (!(Gamma >= 0.0)) throw Error(ErrorKind::Config, "Gamma must be >= 0");
}

double ModeContext::rate() const noexcept { return std::abs(gtilde) * Gamma; }

GreensBlock greens_unbounded(const ModeContext& ctx, double t, double tp) {
  ctx.validate();
  const Shared p = shared(ctx);
  const double tau = t - tp;
  const cd phase = std::exp(I * (p.eps * tau));
  const double env = std::exp(-p.half_rate * std::abs(tau));
  const double th_f = heaviside(tau);
  const double th_b = heaviside(-tau);
  const double corr = 0.5 * p.w * p.S2 * env * oscillation(p, tau);

  GreensBlock g{Eigen::Matrix2cd::Zero(), t, tp, ctx.t_in};
  g.L(0, 0) = -I * p.c2 * phase * env * th_f + I * p.s * phase * env * th_b - I * corr * p.c2;
  g.L(1, 1) = -I * p.s * phase * env * th_f + I * p.c2 * phase * env * th_b - I * corr * p.s;
  g.L(1, 0) = -0.5 * env * p.gh * sin_over(p.eps, tau) * th_f;
  g.L(0, 1) = g.L(1, 0);
  return g;
}

GreensBlock greens_causal(const ModeContext& ctx, double t, double tp) {
  ctx.validate();
  check_times(ctx, t, tp);
  const Shared p = shared(ctx);
  const double tau = t - tp;
  const double a = std::abs(tau);
  const cd phase = std::exp(I * (p.eps * tau));
  const double env = std::exp(-p.half_rate * a);
  const double bracket = env - std::exp(-p.half_rate * (t + tp - 2.0 * ctx.t_in));
  const double osc = oscillation(p, tau);
  const cd F00 = p.s * phase - 0.5 * p.w * p.S2 * p.c2 * osc;
  const cd F11 = p.s * phase + 0.5 * p.w * p.S2 * p.s * osc;
  const double so = p.gh * sin_over(p.eps, a);

  GreensBlock g{Eigen::Matrix2cd::Zero(), t, tp, ctx.t_in};
  g.L(0, 0) = -I * phase * env * heaviside(tau) + I * F00 * bracket;
  g.L(1, 1) = I * phase * env * heaviside(-tau) - I * F11 * bracket;
  g.L(0, 1) = -0.5 * std::exp(-p.half_rate * tau) * p.gh * sin_over(p.eps, tau) * heaviside(tau);
  g.L(1, 0) = 0.5 * env * so * heaviside(-tau) - env * so * bracket;
  return g;
}

GreensBlock greens_equal_time(const ModeContext& ctx, double t, TransientRate rate) {
  ctx.validate();
  check_times(ctx, t, t);
  const Shared p = shared(ctx);
  const double r = rate == TransientRate::full ? ctx.rate() : 0.5 * ctx.rate();
  const double e = -std::expm1(-r * (t - ctx.t_in));
  const double bracket = 0.5 - p.s * e;
  const double corr = 0.5 * p.w * p.S2 * e;
  GreensBlock g{Eigen::Matrix2cd::Zero(), t, t, ctx.t_in};
  g.L(0, 0) = -I * (bracket + corr * p.c2);
  g.L(1, 1) = -I * (-bracket + corr * p.s);
  return g;
}

Eigen::Matrix2cd greens_steady(const ModeContext& ctx) {
  ctx.validate();
  const Shared p = shared(ctx);
  const double bracket = p.half_rate > 0.0 ? 0.5 - p.s : 0.5;
  const double corr = p.half_rate > 0.0 ? 0.5 * p.w * p.S2 : 0.0;
  Eigen::Matrix2cd L = Eigen::Matrix2cd::Zero();
  L(0, 0) = -I * (bracket + corr * p.c2);
  L(1, 1) = -I * (-bracket + corr * p.s);
  return L;
}

}  // namespace dk
