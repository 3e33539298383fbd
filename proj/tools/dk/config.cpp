#include "config.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace dkcli {

using nlohmann::json;

const char* to_string(Command c) noexcept {
  switch (c) {
    case Command::steady: return "steady";
    case Command::evolve: return "evolve";
    case Command::scan_h: return "scan-h";
    case Command::corr_length: return "corr-length";
    case Command::oracle_check: return "oracle-check";
    case Command::diag: return "diag";
  }
  return "steady";
}

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::optional<Command> command_from(const std::string& s) {
  for (Command c : {Command::steady, Command::evolve, Command::scan_h, Command::corr_length,
                    Command::oracle_check, Command::diag})
    if (s == to_string(c)) return c;
  return std::nullopt;
}

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  int line = 1;
  for (std::size_t i = 0; i < offset; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

// Line of the last component of a dotted key path, found by walking quoted keys in order.
std::optional<int> locate(const std::string& text, const std::vector<std::string>& path) {
  if (text.empty()) return std::nullopt;
  std::size_t pos = 0;
  for (const auto& key : path) {
    const std::string quoted = "\"" + key + "\"";
    std::size_t found = std::string::npos;
    for (std::size_t p = text.find(quoted, pos); p != std::string::npos;
         p = text.find(quoted, p + 1)) {
      std::size_t q = p + quoted.size();
      while (q < text.size() && std::isspace(static_cast<unsigned char>(text[q]))) ++q;
      if (q < text.size() && text[q] == ':') {
        found = p;
        break;
      }
    }
    if (found == std::string::npos) return std::nullopt;
    pos = found + quoted.size();
  }
  return line_of_offset(text, pos);
}

const char* type_name(const json& v) {
  switch (v.type()) {
    case json::value_t::null: return "null";
    case json::value_t::boolean: return "boolean";
    case json::value_t::string: return "string";
    case json::value_t::array: return "array";
    case json::value_t::object: return "object";
    case json::value_t::number_integer:
    case json::value_t::number_unsigned: return "integer";
    case json::value_t::number_float: return "number";
    default: return "value";
  }
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

class Context {
 public:
  Context(const std::string& text, const std::string& source, const std::set<std::string>& flags)
      : text_(text), source_(source), flags_(flags) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    std::string dotted;
    for (std::size_t i = 0; i < path.size(); ++i) dotted += (i ? "." : "") + path[i];
    std::ostringstream os;
    bool from_flag = false;
    for (const auto& f : flags_)
      from_flag = from_flag || dotted == f || dotted.rfind(f + ".", 0) == 0;
    if (from_flag) {
      os << "command line";
    } else {
      os << source_;
      if (auto line = locate(text_, path)) os << ":" << *line;
    }
    os << ": ";
    if (!dotted.empty()) os << dotted << ": ";
    os << msg;
    throw ConfigError(os.str());
  }

 private:
  const std::string& text_;
  const std::string& source_;
  const std::set<std::string>& flags_;
};

class Section {
 public:
  Section(const Context& ctx, const json& obj, std::vector<std::string> path)
      : ctx_(ctx), obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) ctx_.fail(path_, std::string("expected object, got ") + type_name(obj_));
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::vector<std::string> at(const std::string& key) const {
    auto p = path_;
    p.push_back(key);
    return p;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    ctx_.fail(at(key), msg);
  }

  void number(const std::string& key, double& out, double lo = -inf, double hi = inf,
              bool lo_open = false) {
    const json* v = get(key);
    if (!v) return;
    if (!v->is_number())
      fail(key, std::string("expected number, got ") + type_name(*v));
    const double x = v->get<double>();
    if (!std::isfinite(x) || x < lo || x > hi || (lo_open && x == lo)) {
      std::string range = std::string(lo_open ? "(" : "[") + (std::isinf(lo) ? "-inf" : fmt(lo)) +
                          ", " + (std::isinf(hi) ? "inf" : fmt(hi)) + "]";
      fail(key, "value " + fmt(x) + " outside valid range " + range);
    }
    out = x;
  }

  void integer(const std::string& key, int& out, long lo, long hi) {
    const json* v = get(key);
    if (!v) return;
    if (!v->is_number_integer())
      fail(key, std::string("expected integer, got ") + type_name(*v));
    const long x = v->get<long>();
    if (x < lo || x > hi)
      fail(key, "value " + std::to_string(x) + " outside valid range [" + std::to_string(lo) +
                    ", " + std::to_string(hi) + "]");
    out = static_cast<int>(x);
  }

  void boolean(const std::string& key, bool& out) {
    const json* v = get(key);
    if (!v) return;
    if (!v->is_boolean()) fail(key, std::string("expected boolean, got ") + type_name(*v));
    out = v->get<bool>();
  }

  std::optional<std::string> string(const std::string& key,
                                    const std::vector<std::string>& allowed = {}) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) fail(key, std::string("expected string, got ") + type_name(*v));
    std::string s = v->get<std::string>();
    if (!allowed.empty()) {
      bool ok = false;
      std::string list;
      for (const auto& a : allowed) {
        ok = ok || a == s;
        list += (list.empty() ? "" : ", ") + a;
      }
      if (!ok) fail(key, "value \"" + s + "\" not one of {" + list + "}");
    }
    return s;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) ctx_.fail(at(it.key()), "unknown key");
  }

  const Context& context() const { return ctx_; }

 private:
  const Context& ctx_;
  const json& obj_;
  std::vector<std::string> path_;
  std::set<std::string> seen_;
};

void read_model(Section s, RunConfig& c) {
  if (s.has("h")) c.h_given = true;
  s.number("h", c.model.h);
  s.integer("N", c.model.N, 1, 1000000);
  if (auto b = s.string("boundary", {"antiperiodic", "periodic"}))
    c.model.boundary = *b == "periodic" ? dk::Boundary::periodic : dk::Boundary::antiperiodic;
  s.finish();
}

void read_density(Section s, DensityConfig& d) {
  d.family = s.string("family", {"flat", "lorentzian", "power_law"}).value_or("");
  if (d.family.empty()) s.fail("family", "required when a density is given");
  s.number("epsilon_s", d.epsilon_s, 0.0, inf, true);
  s.number("D0", d.D0, 0.0);
  s.number("lo", d.lo);
  s.number("hi", d.hi);
  s.number("E0", d.E0);
  s.number("eta", d.eta, 0.0, inf, true);
  s.number("amp", d.amp, 0.0);
  s.number("alpha", d.alpha, 0.0);
  s.number("s", d.s, 0.0);
  s.number("cutoff", d.cutoff, 0.0, inf, true);
  if (d.family == "flat" && !(d.hi > d.lo)) s.fail("hi", "flat density needs hi > lo");
  s.finish();
}

void read_bath(Section s, RunConfig& c) {
  s.number("Gamma", c.bath.Gamma, 0.0);
  s.number("deltaE", c.bath.deltaE);
  s.number("b", c.bath.b, 0.0, 1.0);
  if (const json* v = s.get("beta")) {
    if (v->is_string()) {
      const auto str = v->get<std::string>();
      if (str != "inf" && str != "infinity") s.fail("beta", "expected a number > 0 or \"inf\"");
      c.bath.beta = inf;
    } else {
      s.number("beta", c.bath.beta, 0.0, inf, true);
    }
  }
  if (const json* v = s.get("density")) read_density(Section(s.context(), *v, s.at("density")), c.density);
  s.finish();
}

void read_profile(Section s, RunConfig& c) {
  std::map<int, double> g;
  if (const json* v = s.get("g")) {
    if (!v->is_object()) s.fail("g", std::string("expected object, got ") + type_name(*v));
    Section gs(s.context(), *v, s.at("g"));
    for (auto it = v->begin(); it != v->end(); ++it) {
      int d = 0;
      try {
        std::size_t used = 0;
        d = std::stoi(it.key(), &used);
        if (used != it.key().size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        gs.fail(it.key(), "displacement keys must be integers");
      }
      if (std::abs(d) > 1000) gs.fail(it.key(), "displacement outside valid range [-1000, 1000]");
      double val = 0.0;
      gs.number(it.key(), val);
      if (auto m = g.find(-d); m != g.end() && m->second != val)
        gs.fail(it.key(), "coupling must satisfy g_d = g_-d");
      g[d] = val;
      g[-d] = val;
    }
  }
  if (const json* v = s.get("local")) {
    if (!g.empty()) s.fail("local", "give either local or g, not both");
    if (!v->is_number()) s.fail("local", std::string("expected number, got ") + type_name(*v));
    double val = v->get<double>();
    g[0] = val;
  }
  if (!g.empty()) c.profile = dk::CouplingProfile(g);
  s.finish();
}

void read_quad(Section s, RunConfig& c) {
  if (auto m = s.string("method", {"adaptive", "gauss"}))
    c.quad.method = *m == "gauss" ? dk::QuadMethod::gauss : dk::QuadMethod::adaptive;
  s.number("abs_tol", c.quad.abs_tol, 0.0, 1.0, true);
  s.number("rel_tol", c.quad.rel_tol, 0.0, 1.0, true);
  s.integer("max_subdivisions", c.quad.max_subdivisions, 1, 10000000);
  s.integer("gauss_panels", c.quad.gauss_panels, 1, 1000000);
  s.boolean("auto_critical_splits", c.quad.auto_critical_splits);
  if (const json* v = s.get("split_points")) {
    if (!v->is_array()) s.fail("split_points", "expected array of numbers");
    c.quad.split_points.clear();
    for (const auto& x : *v) {
      if (!x.is_number()) s.fail("split_points", "expected array of numbers");
      const double p = x.get<double>();
      if (!(p > 0.0 && p < M_PI)) s.fail("split_points", "points must lie in (0, pi)");
      if (!c.quad.split_points.empty() && !(p > c.quad.split_points.back()))
        s.fail("split_points", "points must be strictly increasing");
      c.quad.split_points.push_back(p);
    }
  }
  s.finish();
}

void read_sweep(Section s, RunConfig& c) {
  auto& w = c.sweep;
  if (const json* v = s.get("h")) {
    if (!v->is_array()) s.fail("h", "expected array of numbers");
    w.h.clear();
    for (const auto& x : *v) {
      if (!x.is_number() || !std::isfinite(x.get<double>())) s.fail("h", "expected array of numbers");
      w.h.push_back(x.get<double>());
    }
  }
  s.number("h_from", w.h_from);
  s.number("h_to", w.h_to);
  s.number("h_step", w.h_step, 0.0, inf, true);
  if (w.h_to < w.h_from) s.fail("h_to", "must be >= h_from");
  s.integer("d_min", w.d_min, -dk::max_displacement, dk::max_displacement);
  s.integer("d_max", w.d_max, -dk::max_displacement, dk::max_displacement);
  if (w.d_max < w.d_min) s.fail("d_max", "must be >= d_min");
  s.number("t_in", w.t_in);
  s.number("t_max", w.t_max, 0.0);
  s.integer("t_points", w.t_points, 1, 100000);
  s.boolean("weak", w.weak);
  if (auto r = s.string("rate", {"full", "half"}))
    w.rate = *r == "half" ? dk::TransientRate::half : dk::TransientRate::full;
  s.integer("L_min", w.L_min, 1, dk::max_displacement);
  s.integer("L_max", w.L_max, 1, dk::max_displacement);
  if (w.L_max <= w.L_min) s.fail("L_max", "must be > L_min");
  s.number("delta", w.delta, 0.0, 0.5, true);
  s.finish();
}

void read_oracle(Section s, RunConfig& c) {
  auto& o = c.oracle;
  s.boolean("greens", o.greens);
  s.boolean("finite_chain", o.finite_chain);
  s.boolean("isolated", o.isolated);
  s.integer("momenta", o.momenta, 1, 100000);
  s.integer("times", o.times, 2, 100000);
  s.number("greens_threshold", o.greens_threshold, 0.0, inf, true);
  s.integer("chain_sites", o.chain_sites, 2, 10000000);
  s.number("chain_threshold", o.chain_threshold, 0.0, inf, true);
  s.number("isolated_threshold", o.isolated_threshold, 0.0, inf, true);
  s.finish();
}

void read_output(Section s, RunConfig& c) {
  if (auto d = s.string("dir")) {
    if (d->empty()) s.fail("dir", "must not be empty");
    c.output.dir = *d;
  }
  if (auto p = s.string("prefix")) c.output.prefix = *p;
  s.boolean("plot", c.output.plot);
  s.boolean("svg", c.output.svg);
  s.finish();
}

}  // namespace

std::vector<double> RunConfig::h_values() const {
  if (!sweep.h.empty()) return sweep.h;
  if (h_given) return {model.h};
  std::vector<double> out;
  const long n = std::lround(std::floor((sweep.h_to - sweep.h_from) / sweep.h_step + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(sweep.h_from + static_cast<double>(k) * sweep.h_step);
  return out;
}

dk::BathSpec RunConfig::effective_bath() const {
  if (density.family.empty()) return bath;
  dk::SpectralDensity D;
  if (density.family == "flat") D = dk::SpectralDensity::flat(density.D0, density.lo, density.hi);
  else if (density.family == "lorentzian")
    D = dk::SpectralDensity::lorentzian(density.E0, density.eta, density.amp);
  else D = dk::SpectralDensity::power_law(density.alpha, density.s, density.cutoff);
  return dk::markov_params(D, density.epsilon_s, bath.beta, quad);
}

std::string RunConfig::file_prefix() const {
  return output.prefix.empty() ? std::string(to_string(command)) : output.prefix;
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text, nullptr, true, false);
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)
       << ": malformed JSON: " << e.what();
    throw ConfigError(os.str());
  }
}

void apply_override(json& doc, const std::string& path, const std::string& value) {
  if (path.empty()) throw ConfigError("override: empty key");
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ConfigError("override: malformed key \"" + path + "\"");
    if (!node->is_object()) throw ConfigError("override: \"" + path + "\" crosses a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = parsed;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

RunConfig build_config(const json& doc, const std::string& text, const std::string& source,
                       const std::set<std::string>& flag_keys) {
  Context ctx(text, source, flag_keys);
  Section top(ctx, doc, {});
  RunConfig c;
  if (auto cmd = top.string("command", {"steady", "evolve", "scan-h", "corr-length",
                                        "oracle-check", "diag"}))
    c.command = *command_from(*cmd);
  else
    ctx.fail({"command"}, "required key missing");
  if (const json* v = top.get("model")) read_model(Section(ctx, *v, {"model"}), c);
  if (top.has("h")) {
    if (c.h_given) top.fail("h", "given both at top level and in model");
    top.number("h", c.model.h);
    c.h_given = true;
  }
  try {
    if (const json* v = top.get("bath")) read_bath(Section(ctx, *v, {"bath"}), c);
    if (const json* v = top.get("profile")) read_profile(Section(ctx, *v, {"profile"}), c);
  } catch (const ConfigError&) {
    throw;
  } catch (const dk::Error& e) {
    ctx.fail({"profile"}, e.what());
  }
  if (const json* v = top.get("quadrature")) read_quad(Section(ctx, *v, {"quadrature"}), c);
  if (const json* v = top.get("sweep")) read_sweep(Section(ctx, *v, {"sweep"}), c);
  if (const json* v = top.get("oracle")) read_oracle(Section(ctx, *v, {"oracle"}), c);
  if (const json* v = top.get("output")) read_output(Section(ctx, *v, {"output"}), c);
  if (const json* v = top.get("seed")) {
    if (!v->is_number_unsigned()) top.fail("seed", "expected non-negative integer");
    c.seed = v->get<unsigned>();
  }
  top.integer("threads", c.threads, 0, 1024);
  top.finish();
  return c;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  return build_config(parse_json(text, source), text, source);
}

json to_json(const RunConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  j["model"] = {{"h", c.model.h},
                {"N", c.model.N},
                {"boundary", c.model.boundary == dk::Boundary::periodic ? "periodic" : "antiperiodic"}};
  json bath = {{"Gamma", c.bath.Gamma}, {"deltaE", c.bath.deltaE}, {"b", c.bath.b}};
  if (std::isinf(c.bath.beta)) bath["beta"] = "inf";
  else bath["beta"] = c.bath.beta;
  if (!c.density.family.empty()) {
    const auto& d = c.density;
    bath["density"] = {{"family", d.family}, {"epsilon_s", d.epsilon_s}, {"D0", d.D0},
                       {"lo", d.lo},         {"hi", d.hi},               {"E0", d.E0},
                       {"eta", d.eta},       {"amp", d.amp},             {"alpha", d.alpha},
                       {"s", d.s},           {"cutoff", d.cutoff}};
  }
  j["bath"] = bath;
  json g = json::object();
  for (const auto& [d, v] : c.profile.coefficients())
    if (d >= 0) g[std::to_string(d)] = v;
  j["profile"] = {{"g", g}};
  j["quadrature"] = {{"method", c.quad.method == dk::QuadMethod::gauss ? "gauss" : "adaptive"},
                     {"abs_tol", c.quad.abs_tol},
                     {"rel_tol", c.quad.rel_tol},
                     {"max_subdivisions", c.quad.max_subdivisions},
                     {"gauss_panels", c.quad.gauss_panels},
                     {"auto_critical_splits", c.quad.auto_critical_splits},
                     {"split_points", c.quad.split_points}};
  const auto& w = c.sweep;
  j["sweep"] = {{"h", c.h_values()}, {"h_from", w.h_from}, {"h_to", w.h_to},
                {"h_step", w.h_step}, {"d_min", w.d_min}, {"d_max", w.d_max},
                {"t_in", w.t_in}, {"t_max", w.t_max}, {"t_points", w.t_points},
                {"weak", w.weak}, {"rate", w.rate == dk::TransientRate::half ? "half" : "full"},
                {"L_min", w.L_min}, {"L_max", w.L_max}, {"delta", w.delta}};
  const auto& o = c.oracle;
  j["oracle"] = {{"greens", o.greens}, {"finite_chain", o.finite_chain},
                 {"isolated", o.isolated}, {"momenta", o.momenta}, {"times", o.times},
                 {"greens_threshold", o.greens_threshold}, {"chain_sites", o.chain_sites},
                 {"chain_threshold", o.chain_threshold},
                 {"isolated_threshold", o.isolated_threshold}};
  j["output"] = {{"dir", c.output.dir}, {"prefix", c.file_prefix()}, {"plot", c.output.plot},
                 {"svg", c.output.svg}};
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j;
}

}  // namespace dkcli
