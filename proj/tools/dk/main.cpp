#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

namespace {

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

// Convenience flags; each maps onto one dotted config key.
const Flag flags[] = {
    {"--h", "model.h", "transverse field (single point)"},
    {"--N", "model.N", "chain length for diag and finite-chain checks"},
    {"--boundary", "model.boundary", "antiperiodic | periodic"},
    {"--gamma", "bath.Gamma", "bath decay rate Gamma"},
    {"--g0", "profile.local", "local coupling g_0"},
    {"--method", "quadrature.method", "adaptive | gauss"},
    {"--abs-tol", "quadrature.abs_tol", "absolute quadrature tolerance"},
    {"--rel-tol", "quadrature.rel_tol", "relative quadrature tolerance"},
    {"--h-from", "sweep.h_from", "first field of the sweep range"},
    {"--h-to", "sweep.h_to", "last field of the sweep range"},
    {"--h-step", "sweep.h_step", "field step of the sweep range"},
    {"--d-min", "sweep.d_min", "smallest displacement"},
    {"--d-max", "sweep.d_max", "largest displacement"},
    {"--t-max", "sweep.t_max", "time span in units of 1/(g~ Gamma)"},
    {"--t-points", "sweep.t_points", "number of time points"},
    {"--rate", "sweep.rate", "transient exponent: full | half"},
    {"--out", "output.dir", "output directory"},
    {"--prefix", "output.prefix", "output file prefix"},
    {"--threads", "threads", "worker threads (0: all cores)"},
    {"--seed", "seed", "seed for randomized suites"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dissipative Kitaev chain covariance toolkit"};
  app.set_help_flag("--help", "print this help and exit");
  app.set_version_flag("--version", std::string("dk ") + DK_VERSION);
  std::string command, config_path;
  std::vector<std::string> sets;
  bool weak = false, quiet = false;
  app.add_option("command", command, "steady | evolve | scan-h | corr-length | oracle-check | diag");
  app.add_option("-c,--config", config_path, "JSON configuration file");
  app.add_option("--set", sets, "override any key: section.key=value (repeatable)");
  app.add_flag("--weak", weak, "use the weak-coupling steady state");
  app.add_flag("-q,--quiet", quiet, "suppress progress output");
  std::vector<std::string> values(std::size(flags));
  for (std::size_t i = 0; i < std::size(flags); ++i) app.add_option(flags[i].name, values[i], flags[i].help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return dkcli::exit_config;
  }

  std::ostringstream sink;
  std::ostream& log = quiet ? static_cast<std::ostream&>(sink) : std::cerr;
  try {
    std::string text, source = "<flags>";
    nlohmann::json doc = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path, std::ios::binary);
      if (!f) throw dkcli::ConfigError(config_path + ": cannot open config file");
      std::ostringstream ss;
      ss << f.rdbuf();
      text = ss.str();
      source = config_path;
      doc = dkcli::parse_json(text, source);
      if (!doc.is_object()) throw dkcli::ConfigError(source + ":1: top level must be an object");
    }
    std::set<std::string> flag_keys;
    if (!command.empty()) {
      doc["command"] = command;
      flag_keys.insert("command");
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw dkcli::ConfigError("--set " + s + ": expected key=value");
      dkcli::apply_override(doc, s.substr(0, eq), s.substr(eq + 1));
      flag_keys.insert(s.substr(0, eq));
    }
    for (std::size_t i = 0; i < std::size(flags); ++i) {
      if (values[i].empty()) continue;
      std::string key = flags[i].key;
      if (key == "model.h" && doc.contains("h")) key = "h";
      if (key == "profile.local" && doc.contains("profile")) doc["profile"].erase("g");
      dkcli::apply_override(doc, key, values[i]);
      flag_keys.insert(key);
    }
    if (weak) {
      dkcli::apply_override(doc, "sweep.weak", "true");
      flag_keys.insert("sweep.weak");
    }
    const dkcli::RunConfig cfg = dkcli::build_config(doc, text, source, flag_keys);
    return dkcli::run(cfg, log);
  } catch (const dk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dkcli::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dkcli::exit_numerical;
  }
}
