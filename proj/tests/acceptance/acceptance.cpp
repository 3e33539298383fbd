// Acceptance gates. Prints one PASS/FAIL line per criterion; exit status 0 iff all selected pass.
//   acceptance               run every criterion
//   acceptance --criterion N run criterion N only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "commands.hpp"
#include "config.hpp"
#include "dk/covariance.hpp"
#include "dk/oracle.hpp"
#include "dk/quadratic_core.hpp"

namespace {

constexpr double pi = std::numbers::pi;
const double sqrt_2pi = std::sqrt(2.0 * pi);  // local g_0 with g~ = 1

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

const dk::QuadratureSpec quad{};

Outcome same_site_values() {
  double worst = 0.0;
  for (double h : {0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.5, 2.0, 3.0, 4.0}) {
    const double ref = h < 1.0 ? 0.5 : 1.0 - 1.0 / (2.0 * h * h);
    worst = std::max(worst, std::abs(dk::same_site_quadrature(h, quad) - ref));
  }
  const double exact2 = std::abs(dk::same_site_closed_form(2.0).value - 7.0 / 8.0);
  return {worst < 1e-8 && exact2 == 0.0, "max |quadrature - closed form| = " + num(worst) + " (tol 1e-8)"};
}

Outcome derivative_jump() {
  double below = 0.0, above = 0.0;
  for (double s : {1.0, -1.0}) {
    below = std::max(below, std::abs(dk::same_site_derivative(s * (1.0 - 1e-3), quad) - 0.0));
    above = std::max(above, std::abs(dk::same_site_derivative(s * (1.0 + 1e-3), quad) - 1.0));
  }
  return {below < 0.02 && above < 0.02,
          "|D(1-1e-3) - 0| = " + num(below) + ", |D(1+1e-3) - 1| = " + num(above) + " (tol 0.02)"};
}

Outcome greens_kernels() {
  Outcome o;
  double worst = 0.0;
  std::string where;
  for (double h : {0.5, 1.0, 2.0})
    for (double gh : {0.05, 0.3}) {
      dk::GreensOracleSettings s;
      s.h = h;
      s.g_gamma_half = gh;
      s.momenta = 32;
      s.threshold = 1e-6;
      const auto r = dk::greens_oracle(s);
      o.pass = o.pass && r.pass;
      if (r.max_abs_deviation >= worst) {
        worst = r.max_abs_deviation;
        where = r.label + " at " + r.location;
      }
    }
  o.detail = "max deviation = " + num(worst) + " (tol 1e-6), worst " + where;
  return o;
}

Outcome finite_chain() {
  const dk::CouplingProfile prof = dk::CouplingProfile::local(1.0);
  const dk::BathSpec bath{};
  double dev512 = 0.0, dev4096 = 0.0;
  for (double h : {0.5, 1.2})
    for (int d = 0; d <= 20; ++d) {
      dk::CovRequest req;
      req.kind = dk::CovKind::steady;
      req.profile = prof;
      req.bath = bath;
      req.d = d;
      const Eigen::Matrix2d cont = dk::covariance_steady(h, prof, bath, quad, d).C;
      const auto c512 = dk::finite_chain_covariance({h, 512, dk::Boundary::antiperiodic}, req);
      const auto c4096 = dk::finite_chain_covariance({h, 4096, dk::Boundary::antiperiodic}, req);
      dev512 = std::max(dev512, (c512 - cont).cwiseAbs().maxCoeff());
      dev4096 = std::max(dev4096, (c4096 - cont).cwiseAbs().maxCoeff());
    }
  return {dev512 < 1e-3 && dev4096 < 1e-5,
          "N=512 deviation " + num(dev512) + " (tol 1e-3), N=4096 deviation " + num(dev4096) +
              " (tol 1e-5)"};
}

Outcome large_L_tail() {
  const double h = 0.8;
  const auto f = dk::correlation_fit(h, quad, {20, 60, 1});
  const double slope_err = std::abs(f.slope - std::log(h)) / std::abs(std::log(h));
  const double pref = (1.0 - h * h) / (2.0 * h * h);
  const double pref_err = std::abs(std::exp(f.intercept) - pref) / pref;
  return {slope_err < 0.01 && pref_err < 0.02,
          "slope rel. error " + num(slope_err) + " (tol 0.01), prefactor rel. error " + num(pref_err) +
              " (tol 0.02)"};
}

Outcome correlation_scaling() {
  double lead = 0.0, refined = 0.0;
  for (double h : {0.95, 0.98, 0.99}) {
    const double xi = dk::correlation_length(h, quad);
    lead = std::max(lead, std::abs(xi * (1.0 - h) - 1.0));
    refined = std::max(refined, std::abs(xi * -std::log(h) - 1.0));
  }
  return {lead < 0.07 && refined < 0.02,
          "vs 1/(1-h): " + num(lead) + " (tol 0.07), vs -1/ln h: " + num(refined) + " (tol 0.02)"};
}

Outcome relaxation_rate() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / "dk_acceptance_evolve";
  double worst = 0.0;
  for (double rate : {0.1, 0.4}) {
    std::ostringstream text;
    text << R"({"command": "evolve", "sweep": {"h": [0.5, 2.0], "d_min": 0, "d_max": 3,)"
         << R"( "t_max": 10, "t_points": 51}, "profile": {"local": )" << sqrt_2pi
         << R"(}, "bath": {"Gamma": )" << rate << "}}";
    dkcli::RunConfig cfg = dkcli::parse_config(text.str());
    cfg.output.dir = dir.string();
    cfg.output.plot = cfg.output.svg = false;
    std::ostringstream log;
    if (dkcli::run(cfg, log) != dkcli::exit_ok) return {false, "evolve run failed"};
    std::ifstream f(dir / "evolve.json");
    const auto side = nlohmann::json::parse(f);
    for (const auto& fit : side["results"]["fits"]) {
      if (!fit["relative_error"].is_number()) return {false, "fit undefined at g~Gamma = " + num(rate)};
      const double e = fit["relative_error"].get<double>();
      worst = std::max(worst, e);
      o.pass = o.pass && e < 0.02;
    }
  }
  std::filesystem::remove_all(dir);
  o.detail = "max relative rate error " + num(worst) + " (tol 0.02) for g~Gamma in {0.1, 0.4}";
  return o;
}

Outcome physicality() {
  const int N = 64;
  const dk::CouplingProfile prof = dk::CouplingProfile::local(sqrt_2pi);
  double worst = 0.0;
  std::string detail;
  for (double gh : {0.01, 0.1, 0.5}) {
    double w = 0.0, at = 0.0;
    for (int k = 0; k <= 40; ++k) {
      const double h = 0.1 * k;
      dk::BathSpec bath;
      bath.Gamma = 2.0 * gh;
      dk::BlockMap m;
      for (int d = 0; d < N; ++d) m[d] = dk::covariance_steady(h, prof, bath, quad, d).C;
      const double s = dk::physicality_check(dk::assemble_covariance(m, N));
      if (s > w) {
        w = s;
        at = h;
      }
    }
    worst = std::max(worst, w);
    detail += (detail.empty() ? "" : ", ") + std::string("g~Gamma/2=") + num(gh) + ": " + num(w) +
              " at h=" + num(at);
  }
  return {worst <= 1.0 + 1e-9, "max singular value (bound 1 + 1e-9) " + detail};
}

Outcome block_diagonalization() {
  std::mt19937 rng(12345);
  std::uniform_int_distribution<int> half(2, 64);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double recon = 0.0, pairing = 0.0, orth = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 * half(rng);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = U(rng);
    const auto A = dk::AntisymmetricMatrix::from_dense(M - M.transpose());
    const auto bs = dk::block_spectrum(A);
    recon = std::max(recon, (bs.Q.transpose() * A.matrix() * bs.Q - bs.blockform()).cwiseAbs().maxCoeff());
    orth = std::max(orth, (bs.Q.transpose() * bs.Q - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
    // Eigenvalues of A come in pairs +-i eps.
    Eigen::EigenSolver<Eigen::MatrixXd> es(A.matrix(), false);
    std::vector<double> up, down;
    for (int k = 0; k < n; ++k) {
      const auto z = es.eigenvalues()(k);
      pairing = std::max(pairing, std::abs(z.real()));
      (z.imag() >= 0.0 ? up : down).push_back(std::abs(z.imag()));
    }
    if (up.size() != down.size()) pairing = INFINITY;
    std::sort(up.begin(), up.end(), std::greater<>());
    std::sort(down.begin(), down.end(), std::greater<>());
    for (std::size_t k = 0; k < up.size() && k < bs.epsilons.size(); ++k)
      pairing = std::max({pairing, std::abs(up[k] - bs.epsilons[k]), std::abs(down[k] - bs.epsilons[k])});
  }
  double kitaev = 0.0;
  for (double h : {0.3, 1.0, 2.0})
    for (auto bc : {dk::Boundary::antiperiodic, dk::Boundary::periodic}) {
      const dk::KitaevParams p{h, 256, bc};
      const auto bs = dk::block_spectrum(dk::build_A_matrix(p));
      std::vector<double> exact;
      for (double phi : dk::momentum_grid(p.N, bc)) exact.push_back(dk::dispersion(h, phi).epsilon);
      std::sort(exact.begin(), exact.end(), std::greater<>());
      for (std::size_t k = 0; k < exact.size(); ++k)
        kitaev = std::max(kitaev, std::abs(bs.epsilons[k] - exact[k]));
    }
  return {recon < 1e-10 && orth < 1e-10 && pairing < 1e-10 && kitaev < 1e-10,
          "reconstruction " + num(recon) + ", orthogonality " + num(orth) + ", pairing " + num(pairing) +
              ", Kitaev N=256 " + num(kitaev) + " (tol 1e-10)"};
}

Outcome isolated_limit() {
  dk::BathSpec off;
  off.Gamma = 0.0;
  const dk::CouplingProfile prof = dk::CouplingProfile::local(1.0);
  double worst = 0.0;
  for (double h : {0.5, 2.0})
    for (int d = 0; d <= 10; ++d) {
      const Eigen::Matrix2d g = dk::ground_state_covariance(h, quad, d).C;
      for (double t : {0.0, 0.7, 5.0, 50.0, 500.0})
        worst = std::max(worst, (dk::covariance_time(h, prof, off, quad, d, t).C - g).cwiseAbs().maxCoeff());
    }
  return {worst < 1e-8, "max deviation from the ground state " + num(worst) + " (tol 1e-8)"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

const std::vector<Criterion> criteria = {
    {1, "same-site steady value", 5.0, same_site_values},
    {2, "derivative jump at |h| = 1", 5.0, derivative_jump},
    {3, "Green's kernels vs direct integration", 60.0, greens_kernels},
    {4, "finite-chain convergence", 60.0, finite_chain},
    {5, "large-L tail", 0.0, large_L_tail},
    {6, "correlation-length scaling", 0.0, correlation_scaling},
    {7, "relaxation rate", 0.0, relaxation_rate},
    {8, "physicality sweep", 0.0, physicality},
    {9, "block diagonalization", 0.0, block_diagonalization},
    {10, "isolated limit", 0.0, isolated_limit},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  bool all = true, any = false;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    any = true;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s == 0.0 || secs < c.budget_s;
    const bool pass = o.pass && in_time;
    all = all && pass;
    std::printf("%s criterion %d (%s): %s; runtime %.2f s%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs,
                c.budget_s > 0.0 ? (in_time ? " (within budget)" : " (over budget)") : "");
    std::fflush(stdout);
  }
  if (!any) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return all ? 0 : 1;
}
