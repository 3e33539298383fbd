#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <sstream>
#include <tuple>

#include "dk/oracle.hpp"
#include "dk/quadratic_core.hpp"
#include "output.hpp"
#include "pool.hpp"

namespace dkcli {

using nlohmann::json;

int exit_code_for(dk::ErrorKind kind) noexcept {
  switch (kind) {
    case dk::ErrorKind::Config:
    case dk::ErrorKind::UnsupportedClosedForm:
    case dk::ErrorKind::AsymmetricCoupling:
    case dk::ErrorKind::InvalidChain:
    case dk::ErrorKind::BeforeInitialTime:
    case dk::ErrorKind::SingularDensity:
      return exit_config;
    default:
      return exit_numerical;
  }
}

namespace {

constexpr double pi = std::numbers::pi;
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

struct Range {
  double lo, hi;
};

Range gtilde_range(const dk::CouplingProfile& profile) {
  constexpr int n = 4096;
  Range r{INFINITY, -INFINITY};
  for (int k = 0; k <= n; ++k) {
    const double g = dk::g_tilde(profile, pi * k / n);
    r.lo = std::min(r.lo, g);
    r.hi = std::max(r.hi, g);
  }
  return r;
}

std::vector<int> displacements(const RunConfig& c) {
  std::vector<int> ds;
  for (int d = c.sweep.d_min; d <= c.sweep.d_max; ++d) ds.push_back(d);
  return ds;
}

void sort_rows(Table& t, std::size_t keys) {
  std::stable_sort(t.rows.begin(), t.rows.end(), [keys](const auto& a, const auto& b) {
    auto num = [](const Cell& c) {
      if (const double* d = std::get_if<double>(&c)) return *d;
      if (const long* l = std::get_if<long>(&c)) return static_cast<double>(*l);
      return 0.0;
    };
    for (std::size_t k = 0; k < keys; ++k) {
      const double x = num(a[k]), y = num(b[k]);
      if (x < y) return true;
      if (y < x) return false;
    }
    return false;
  });
}

double finite_or_nan(double x) { return std::isfinite(x) ? x : nan; }

json json_num(double x) { return std::isfinite(x) ? json(x) : json(format_double(x)); }

// Writes tables, plots and the sidecar into the output directory.
class Emitter {
 public:
  Emitter(const RunConfig& cfg, std::ostream& log) : cfg_(cfg), log_(log) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output.dir, ec);
    if (ec || !std::filesystem::is_directory(cfg.output.dir))
      throw ConfigError("output.dir: cannot create directory " + cfg.output.dir);
    config_ = to_json(cfg);
    comment_ = std::string("dk ") + DK_VERSION + " config=" + config_.dump();
  }

  std::string name(const std::string& suffix) const { return cfg_.file_prefix() + suffix; }
  std::string path(const std::string& file) const {
    return (std::filesystem::path(cfg_.output.dir) / file).string();
  }

  void table(const std::string& suffix, const Table& t, const std::string& description) {
    const std::string file = name(suffix);
    write_csv(path(file), t, comment_);
    files_.push_back({{"file", file}, {"columns", t.columns}, {"rows", t.rows.size()},
                      {"description", description}});
  }

  void finish(std::vector<Panel> panels, const json& results) {
    if (cfg_.output.plot && !panels.empty()) {
      const std::string script = name("_plot.py");
      write_plot_script(path(script), panels, comment_, name("_plot.png"));
      files_.push_back({{"file", script}, {"description", "matplotlib script"}});
    }
    if (cfg_.output.svg && !panels.empty()) {
      const std::string svg = name(".svg");
      write_svg(path(svg), panels, comment_);
      files_.push_back({{"file", svg}, {"description", "vector-graphics fallback"}});
    }
    json side = {{"artifact", "dk"},
                 {"version", DK_VERSION},
                 {"command", to_string(cfg_.command)},
                 {"config", config_},
                 {"files", files_},
                 {"results", results}};
    const std::string sidecar = name(".json");
    write_json(path(sidecar), side);
    log_ << "wrote " << path(sidecar) << "\n";
  }

 private:
  const RunConfig& cfg_;
  std::ostream& log_;
  json config_;
  std::string comment_;
  json files_ = json::array();
};

const std::vector<std::string> block_columns = {"C00", "C01", "C10", "C11"};

void push_block(std::vector<Cell>& row, const Eigen::Matrix2d& C) {
  row.push_back(C(0, 0));
  row.push_back(C(0, 1));
  row.push_back(C(1, 0));
  row.push_back(C(1, 1));
}

// ---------------------------------------------------------------------------

int cmd_steady(const RunConfig& cfg, std::ostream& log) {
  const auto hs = cfg.h_values();
  const auto ds = displacements(cfg);
  const dk::BathSpec bath = cfg.effective_bath();
  const bool weak = cfg.sweep.weak;
  const Range gt = gtilde_range(cfg.profile);

  struct Task {
    double h;
    int d;
  };
  std::vector<Task> tasks;
  for (double h : hs)
    for (int d : ds) tasks.push_back({h, d});
  const auto results = parallel_map<dk::BlockResult>(tasks.size(), cfg.threads, [&](std::size_t i) {
    const Task& t = tasks[i];
    return weak ? dk::covariance_steady_weak(t.h, cfg.quad, t.d)
                : dk::covariance_steady(t.h, cfg.profile, bath, cfg.quad, t.d);
  });

  Table t;
  t.columns = {"h", "d", "t"};
  t.columns.insert(t.columns.end(), block_columns.begin(), block_columns.end());
  for (const char* c : {"Gamma", "gtilde_min", "gtilde_max", "quad_error", "imag_residue"})
    t.columns.push_back(c);
  double worst_error = 0.0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    std::vector<Cell> row{tasks[i].h, static_cast<long>(tasks[i].d), INFINITY};
    push_block(row, results[i].C);
    row.insert(row.end(), {weak ? 0.0 : bath.Gamma, gt.lo, gt.hi, results[i].error,
                           results[i].imag_residue});
    t.rows.push_back(std::move(row));
    worst_error = std::max(worst_error, results[i].error);
  }
  sort_rows(t, 3);

  Emitter out(cfg, log);
  out.table(".csv", t, "steady covariance blocks C_d per (h, d); t = inf");
  std::vector<Panel> panels;
  panels.push_back({"steady C_d vs d", out.name(".csv"), &t, "d", {"C01", "C10"}, "h", false, "d",
                    "C"});
  Table same;
  if (hs.size() > 1 && cfg.sweep.d_min <= 0 && cfg.sweep.d_max >= 0) {
    same.columns = {"h", "C01"};
    for (const auto& r : t.rows)
      if (std::get<long>(r[1]) == 0) same.rows.push_back({r[0], r[4]});
    out.table("_same_site.csv", same, "same-site entry C_0[0][1] vs h");
    panels.push_back({"same-site entry vs h", out.name("_same_site.csv"), &same, "h", {"C01"}, "",
                      false, "h", "C_0[0][1]"});
  }
  out.finish(panels, {{"weak", weak},
                      {"Gamma", bath.Gamma},
                      {"deltaE", bath.deltaE},
                      {"b", bath.b},
                      {"gtilde_min", gt.lo},
                      {"gtilde_max", gt.hi},
                      {"max_quad_error", worst_error}});
  return exit_ok;
}

// ---------------------------------------------------------------------------

struct LineFit {
  double slope = nan, intercept = nan, residual = nan;
  int points = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  const std::size_t n = x.size();
  f.points = static_cast<int>(n);
  if (n < 2) return f;
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

int cmd_evolve(const RunConfig& cfg, std::ostream& log) {
  const auto hs = cfg.h_values();
  const auto ds = displacements(cfg);
  const dk::BathSpec bath = cfg.effective_bath();
  const Range gt = gtilde_range(cfg.profile);
  const double unit_rate = std::max(std::abs(gt.lo), std::abs(gt.hi)) * bath.Gamma;
  if (!(unit_rate > 0.0))
    throw ConfigError("evolve: time grid is in units of 1/(g~ Gamma); needs Gamma > 0 and g~ != 0");
  const double reference_rate = std::min(std::abs(gt.lo), std::abs(gt.hi)) * bath.Gamma *
                                (cfg.sweep.rate == dk::TransientRate::half ? 0.5 : 1.0);
  const int nt = cfg.sweep.t_points;
  std::vector<double> ts;
  for (int k = 0; k < nt; ++k)
    ts.push_back(cfg.sweep.t_in +
                 (nt == 1 ? 0.0 : cfg.sweep.t_max / unit_rate * k / static_cast<double>(nt - 1)));

  struct Key {
    double h;
    int d;
  };
  std::vector<Key> keys;
  for (double h : hs)
    for (int d : ds) keys.push_back({h, d});
  const auto steady = parallel_map<dk::BlockResult>(keys.size(), cfg.threads, [&](std::size_t i) {
    return dk::covariance_steady(keys[i].h, cfg.profile, bath, cfg.quad, keys[i].d);
  });
  const std::size_t nk = keys.size(), ntt = ts.size();
  const auto timed = parallel_map<dk::BlockResult>(nk * ntt, cfg.threads, [&](std::size_t i) {
    const Key& k = keys[i / ntt];
    return dk::covariance_time(k.h, cfg.profile, bath, cfg.quad, k.d, ts[i % ntt], cfg.sweep.t_in,
                               cfg.sweep.rate);
  });

  Table t;
  t.columns = {"h", "d", "t"};
  t.columns.insert(t.columns.end(), block_columns.begin(), block_columns.end());
  for (const char* c : {"deviation", "Gamma", "gtilde_min", "gtilde_max", "quad_error", "imag_residue"})
    t.columns.push_back(c);
  // per (h, t): max over d of |C(t) - C(inf)| and the matching error budget
  std::vector<std::vector<double>> norm(hs.size(), std::vector<double>(ntt, 0.0));
  std::vector<std::vector<double>> budget(hs.size(), std::vector<double>(ntt, 0.0));
  for (std::size_t i = 0; i < nk * ntt; ++i) {
    const std::size_t ki = i / ntt, ti = i % ntt, hi = ki / ds.size();
    const auto& r = timed[i];
    const double dev = (r.C - steady[ki].C).cwiseAbs().maxCoeff();
    norm[hi][ti] = std::max(norm[hi][ti], dev);
    budget[hi][ti] = std::max(budget[hi][ti], r.error + steady[ki].error);
    std::vector<Cell> row{keys[ki].h, static_cast<long>(keys[ki].d), ts[ti]};
    push_block(row, r.C);
    row.insert(row.end(), {dev, bath.Gamma, gt.lo, gt.hi, r.error, r.imag_residue});
    t.rows.push_back(std::move(row));
  }
  sort_rows(t, 3);

  Table nt_table;
  nt_table.columns = {"h", "t", "deviation_inf"};
  Table fits;
  fits.columns = {"h", "rate", "reference_rate", "relative_error", "residual", "points",
                  "t_first", "t_last"};
  json fit_json = json::array();
  for (std::size_t hi = 0; hi < hs.size(); ++hi) {
    std::vector<double> x, y;
    for (std::size_t ti = 0; ti < ntt; ++ti) {
      nt_table.rows.push_back({hs[hi], ts[ti], norm[hi][ti]});
      const double floor = std::max(1e-12, 100.0 * budget[hi][ti]);
      if (!(norm[hi][ti] > floor)) {
        if (!x.empty()) break;
        continue;
      }
      x.push_back(ts[ti]);
      y.push_back(std::log(norm[hi][ti]));
    }
    const LineFit f = fit_line(x, y);
    const double rate = -f.slope;
    const double rel = reference_rate > 0.0 ? std::abs(rate - reference_rate) / reference_rate : nan;
    fits.rows.push_back({hs[hi], finite_or_nan(rate), reference_rate, finite_or_nan(rel),
                         finite_or_nan(f.residual), static_cast<long>(f.points),
                         x.empty() ? nan : x.front(), x.empty() ? nan : x.back()});
    fit_json.push_back({{"h", hs[hi]},
                        {"rate", json_num(rate)},
                        {"reference_rate", reference_rate},
                        {"relative_error", json_num(rel)},
                        {"residual", json_num(f.residual)},
                        {"points", f.points}});
  }
  sort_rows(nt_table, 2);
  sort_rows(fits, 1);

  Emitter out(cfg, log);
  out.table(".csv", t, "time-dependent covariance blocks per (h, d, t) and |C(t) - C(inf)|");
  out.table("_norm.csv", nt_table, "max-norm deviation from the steady state per (h, t)");
  out.table("_fit.csv", fits, "exponential fit of the max-norm deviation");
  std::vector<Panel> panels{{"relaxation ||C(t) - C(inf)||", out.name("_norm.csv"), &nt_table, "t",
                             {"deviation_inf"}, "h", true, "t", "deviation"}};
  out.finish(panels, {{"Gamma", bath.Gamma},
                      {"time_unit", 1.0 / unit_rate},
                      {"rate_variant", cfg.sweep.rate == dk::TransientRate::half ? "half" : "full"},
                      {"fits", fit_json}});
  return exit_ok;
}

// ---------------------------------------------------------------------------


double xi_leading(double h) {
  const double a = std::abs(h);
  return a == 1.0 || h == 0.0 ? nan : 1.0 / std::abs(1.0 - a);
}

double xi_refined(double h) {
  const double a = std::abs(h);
  return a == 1.0 || h == 0.0 ? nan : 1.0 / std::abs(std::log(a));
}

std::optional<std::pair<dk::CouplingProfile, dk::BathSpec>> scan_bath(const RunConfig& cfg) {
  if (cfg.sweep.weak) return std::nullopt;
  return std::make_pair(cfg.profile, cfg.effective_bath());
}

int cmd_scan_h(const RunConfig& cfg, std::ostream& log) {
  const auto hs = cfg.h_values();
  const auto bath = scan_bath(cfg);
  const dk::FitRange range{cfg.sweep.L_min, cfg.sweep.L_max, 1};
  const auto points = parallel_map<dk::CriticalityPoint>(hs.size(), cfg.threads, [&](std::size_t i) {
    return dk::criticality_point(hs[i], cfg.quad, bath, cfg.sweep.delta, range);
  });
  auto sorted = points;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.h < b.h; });
  const dk::CriticalityReport rep = dk::assemble_criticality(sorted, cfg.quad, bath, cfg.sweep.delta);

  Table t;
  t.columns = {"h", "same_site", "closed_form", "derivative", "xi", "xi_leading", "xi_refined"};
  for (std::size_t i = 0; i < rep.h_scan.size(); ++i) {
    const double h = rep.h_scan[i];
    const double closed = std::abs(h) == 1.0 ? 0.5 : dk::same_site_closed_form(h).value;
    t.rows.push_back({h, rep.same_site_value[i], closed, rep.derivative_estimate[i],
                      rep.correlation_length[i], xi_leading(h), xi_refined(h)});
  }

  Emitter out(cfg, log);
  out.table(".csv", t, "same-site entry, |h|-derivative and correlation length vs h");
  std::vector<Panel> panels{
      {"same-site entry vs h", out.name(".csv"), &t, "h", {"same_site", "closed_form"}, "", false,
       "h", "C_0[0][1]"},
      {"derivative with respect to |h|", out.name(".csv"), &t, "h", {"derivative"}, "", false, "h",
       "dC/d|h|"}};
  out.finish(panels, {{"weak", !bath.has_value()},
                      {"jump_location", rep.jump_location},
                      {"jump_size", json_num(rep.jump_size)},
                      {"delta", cfg.sweep.delta}});
  return exit_ok;
}

// ---------------------------------------------------------------------------

int cmd_corr_length(const RunConfig& cfg, std::ostream& log) {
  const auto hs = cfg.h_values();
  const dk::FitRange range{cfg.sweep.L_min, cfg.sweep.L_max, 1};
  struct Out {
    dk::CorrelationFit fit{nan, nan, nan, 0};
    std::string note;
  };
  const auto fits = parallel_map<Out>(hs.size(), cfg.threads, [&](std::size_t i) {
    Out o;
    try {
      o.fit = dk::correlation_fit(hs[i], cfg.quad, range);
    } catch (const dk::Error& e) {
      if (e.kind() != dk::ErrorKind::UnderflowRange && e.kind() != dk::ErrorKind::AtCriticalPoint)
        throw;
      o.note = dk::to_string(e.kind());
    }
    return o;
  });
  std::vector<int> Ls;
  for (int L = cfg.sweep.L_min; L <= cfg.sweep.L_max; ++L) Ls.push_back(L);
  const auto tail = parallel_map<double>(hs.size() * Ls.size(), cfg.threads, [&](std::size_t i) {
    const double h = hs[i / Ls.size()];
    if (std::abs(h) == 1.0 || h == 0.0) return nan;
    const auto C = dk::covariance_steady_weak(h, cfg.quad, Ls[i % Ls.size()]).C;
    return std::abs(h) < 1.0 ? C(0, 1) : C(1, 0);
  });

  Table t;
  t.columns = {"h", "xi", "slope", "prefactor", "prefactor_expected", "points", "xi_leading",
               "xi_refined", "note"};
  json summary = json::array();
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double h = hs[i];
    const auto& f = fits[i].fit;
    const double expected = h == 0.0 ? nan : std::abs((1.0 - h * h) / (2.0 * h * h));
    t.rows.push_back({h, finite_or_nan(f.xi), finite_or_nan(f.slope),
                      finite_or_nan(std::exp(f.intercept)), expected, static_cast<long>(f.points),
                      xi_leading(h), xi_refined(h), fits[i].note});
    summary.push_back({{"h", h}, {"xi", json_num(f.xi)}, {"slope", json_num(f.slope)},
                       {"points", f.points}, {"note", fits[i].note}});
  }
  sort_rows(t, 1);
  Table prof;
  prof.columns = {"h", "L", "C", "ln_abs_C"};
  for (std::size_t i = 0; i < tail.size(); ++i)
    prof.rows.push_back({hs[i / Ls.size()], static_cast<long>(Ls[i % Ls.size()]), tail[i],
                         std::log(std::abs(tail[i]))});
  sort_rows(prof, 2);

  Emitter out(cfg, log);
  out.table(".csv", t, "fit of ln|C| vs L on the weak-coupling steady entry");
  out.table("_tail.csv", prof, "weak-coupling steady entry vs displacement L");
  std::vector<Panel> panels{{"ln|C| vs L", out.name("_tail.csv"), &prof, "L", {"ln_abs_C"}, "h",
                             false, "L", "ln|C|"}};
  out.finish(panels, {{"fit_range", {range.L_min, range.L_max}}, {"fits", summary}});
  return exit_ok;
}

// ---------------------------------------------------------------------------

int cmd_oracle_check(const RunConfig& cfg, std::ostream& log) {
  const auto& o = cfg.oracle;
  std::vector<dk::ComparisonReport> reports;

  if (o.greens) {
    const std::vector<double> hs = cfg.sweep.h.empty() && !cfg.h_given
                                       ? std::vector<double>{0.5, 1.0, 2.0}
                                       : cfg.h_values();
    std::vector<dk::GreensOracleSettings> settings;
    for (double h : hs)
      for (double gh : {0.05, 0.3}) {
        dk::GreensOracleSettings s;
        s.h = h;
        s.g_gamma_half = gh;
        s.momenta = o.momenta;
        s.times = o.times;
        s.threshold = o.greens_threshold;
        settings.push_back(s);
      }
    auto r = parallel_map<dk::ComparisonReport>(settings.size(), cfg.threads, [&](std::size_t i) {
      return dk::greens_oracle(settings[i]);
    });
    reports.insert(reports.end(), r.begin(), r.end());
  }

  if (o.finite_chain) {
    const dk::BathSpec bath = cfg.effective_bath();
    const std::vector<double> hs{0.5, 1.2};
    auto r = parallel_map<dk::ComparisonReport>(hs.size(), cfg.threads, [&](std::size_t i) {
      std::vector<double> ref, cand;
      std::vector<std::string> loc;
      for (int d = 0; d <= 20; ++d) {
        dk::CovRequest req;
        req.kind = dk::CovKind::steady;
        req.h = hs[i];
        req.profile = cfg.profile;
        req.bath = bath;
        req.d = d;
        const Eigen::Matrix2d chain = dk::finite_chain_covariance(
            dk::KitaevParams{hs[i], o.chain_sites, dk::Boundary::antiperiodic}, req);
        const Eigen::Matrix2d cont = dk::covariance_steady(hs[i], cfg.profile, bath, cfg.quad, d).C;
        for (int k = 0; k < 4; ++k) {
          ref.push_back(cont(k / 2, k % 2));
          cand.push_back(chain(k / 2, k % 2));
          loc.push_back("d=" + std::to_string(d) + " entry=" + std::to_string(k / 2) +
                        std::to_string(k % 2));
        }
      }
      std::ostringstream label;
      label << "finite_chain h=" << hs[i] << " N=" << o.chain_sites;
      return dk::compare(label.str(), ref, cand, o.chain_threshold, loc);
    });
    reports.insert(reports.end(), r.begin(), r.end());
  }

  if (o.isolated) {
    const std::vector<double> hs{0.5, 2.0};
    auto r = parallel_map<dk::ComparisonReport>(hs.size(), cfg.threads, [&](std::size_t i) {
      dk::BathSpec off;
      off.Gamma = 0.0;
      std::vector<double> ref, cand;
      std::vector<std::string> loc;
      for (int d = 0; d <= 10; ++d) {
        const Eigen::Matrix2d g = dk::ground_state_covariance(hs[i], cfg.quad, d).C;
        for (double t : {0.0, 1.0, 10.0, 100.0}) {
          const Eigen::Matrix2d c = dk::covariance_time(hs[i], cfg.profile, off, cfg.quad, d, t).C;
          for (int k = 0; k < 4; ++k) {
            ref.push_back(g(k / 2, k % 2));
            cand.push_back(c(k / 2, k % 2));
            std::ostringstream l;
            l << "d=" << d << " t=" << t << " entry=" << k / 2 << k % 2;
            loc.push_back(l.str());
          }
        }
      }
      std::ostringstream label;
      label << "isolated h=" << hs[i];
      return dk::compare(label.str(), ref, cand, o.isolated_threshold, loc);
    });
    reports.insert(reports.end(), r.begin(), r.end());
  }

  Table t;
  t.columns = {"index", "label", "max_abs_deviation", "threshold", "pass", "location"};
  json rj = json::array();
  bool all = true;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    all = all && r.pass;
    t.rows.push_back({static_cast<long>(i), r.label, r.max_abs_deviation, r.threshold,
                      static_cast<long>(r.pass ? 1 : 0), r.location});
    rj.push_back({{"label", r.label},
                  {"max_abs_deviation", json_num(r.max_abs_deviation)},
                  {"threshold", r.threshold},
                  {"pass", r.pass},
                  {"location", r.location}});
    log << (r.pass ? "PASS " : "FAIL ") << r.label << " max_abs_deviation="
        << format_double(r.max_abs_deviation) << " threshold=" << r.threshold << " at " << r.location
        << "\n";
  }

  Emitter out(cfg, log);
  out.table(".csv", t, "oracle comparison reports");
  std::vector<Panel> panels{{"oracle deviations", out.name(".csv"), &t, "index",
                             {"max_abs_deviation", "threshold"}, "", true, "report index",
                             "deviation"}};
  out.finish(panels, {{"pass", all}, {"reports", rj}});
  return all ? exit_ok : exit_oracle;
}

// ---------------------------------------------------------------------------

int cmd_diag(const RunConfig& cfg, std::ostream& log) {
  const dk::KitaevParams params = cfg.model;
  const dk::AntisymmetricMatrix A = dk::build_A_matrix(params);
  const dk::BlockSpectrum bs = dk::block_spectrum(A);
  const Eigen::MatrixXd recon = bs.Q.transpose() * A.matrix() * bs.Q - bs.blockform();
  const double recon_err = recon.cwiseAbs().maxCoeff();
  const double orth_err =
      (bs.Q.transpose() * bs.Q - Eigen::MatrixXd::Identity(A.dim(), A.dim())).cwiseAbs().maxCoeff();
  std::vector<double> exact;
  for (double phi : dk::momentum_grid(params.N, params.boundary))
    exact.push_back(dk::dispersion(params.h, phi).epsilon);
  std::sort(exact.begin(), exact.end(), std::greater<>());

  Table spec;
  spec.columns = {"index", "epsilon_numeric", "epsilon_exact", "abs_error"};
  double eps_err = 0.0;
  for (std::size_t k = 0; k < bs.epsilons.size(); ++k) {
    const double e = std::abs(bs.epsilons[k] - exact[k]);
    eps_err = std::max(eps_err, e);
    spec.rows.push_back({static_cast<long>(k), bs.epsilons[k], exact[k], e});
  }

  const auto hs = cfg.h_values();
  const dk::BathSpec bath = cfg.effective_bath();
  const int N = params.N;
  const auto blocks = parallel_map<Eigen::Matrix2d>(hs.size() * N, cfg.threads, [&](std::size_t i) {
    const double h = hs[i / N];
    const int d = static_cast<int>(i % N);
    return cfg.sweep.weak ? dk::covariance_steady_weak(h, cfg.quad, d).C
                          : dk::covariance_steady(h, cfg.profile, bath, cfg.quad, d).C;
  });
  Table phys;
  phys.columns = {"h", "max_singular_value", "excess"};
  double worst = 0.0;
  for (std::size_t hi = 0; hi < hs.size(); ++hi) {
    dk::BlockMap m;
    for (int d = 0; d < N; ++d) m[d] = blocks[hi * N + d];
    const double s = dk::physicality_check(dk::assemble_covariance(m, N));
    worst = std::max(worst, s);
    phys.rows.push_back({hs[hi], s, s - 1.0});
  }
  sort_rows(phys, 1);

  Emitter out(cfg, log);
  out.table("_spectrum.csv", spec, "block spectrum of the real-space chain vs the dispersion");
  out.table("_physicality.csv", phys, "largest singular value of the assembled steady covariance");
  std::vector<Panel> panels{
      {"spectrum error", out.name("_spectrum.csv"), &spec, "index", {"abs_error"}, "", true,
       "block index", "eps error"},
      {"physicality", out.name("_physicality.csv"), &phys, "h", {"max_singular_value"}, "", false,
       "h", "max singular value"}};
  out.finish(panels, {{"reconstruction_error", recon_err},
                      {"orthogonality_error", orth_err},
                      {"max_epsilon_error", eps_err},
                      {"max_singular_value", worst},
                      {"sites", N}});
  log << "reconstruction " << format_double(recon_err) << ", spectrum " << format_double(eps_err)
      << ", max singular value " << format_double(worst) << "\n";
  return exit_ok;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& log) {
  switch (cfg.command) {
    case Command::steady: return cmd_steady(cfg, log);
    case Command::evolve: return cmd_evolve(cfg, log);
    case Command::scan_h: return cmd_scan_h(cfg, log);
    case Command::corr_length: return cmd_corr_length(cfg, log);
    case Command::oracle_check: return cmd_oracle_check(cfg, log);
    case Command::diag: return cmd_diag(cfg, log);
  }
  return exit_config;
}

}  // namespace dkcli
