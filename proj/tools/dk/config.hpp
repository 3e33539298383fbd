#pragma once

// Run configuration: JSON text and command-line overrides into a validated RunConfig.

#include <map>
#include <set>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dk/bath.hpp"
#include "dk/covariance.hpp"
#include "dk/model.hpp"
#include "dk/quadrature.hpp"

namespace dkcli {

enum class Command { steady, evolve, scan_h, corr_length, oracle_check, diag };

const char* to_string(Command c) noexcept;

struct DensityConfig {
  std::string family;  // empty: use Gamma, deltaE, b directly
  double D0 = 0.0, lo = 0.0, hi = 0.0;
  double E0 = 1.0, eta = 0.1, amp = 1.0;
  double alpha = 0.0, s = 1.0, cutoff = 1.0;
  double epsilon_s = 1.0;
};

struct SweepConfig {
  std::vector<double> h;  // explicit field values, overrides the range
  double h_from = 0.0, h_to = 4.0, h_step = 0.05;
  int d_min = 0, d_max = 10;
  double t_in = 0.0;
  double t_max = 10.0;  // in units of 1 / (g~ Gamma)
  int t_points = 51;
  bool weak = false;
  dk::TransientRate rate = dk::TransientRate::full;
  int L_min = 20, L_max = 60;
  double delta = 1e-3;
};

struct OracleConfig {
  bool greens = true;
  bool finite_chain = true;
  bool isolated = true;
  int momenta = 32;
  int times = 11;
  double greens_threshold = 1e-6;
  int chain_sites = 4096;
  double chain_threshold = 1e-5;
  double isolated_threshold = 1e-8;
};

struct OutputConfig {
  std::string dir = "out";
  std::string prefix;  // empty: the command name
  bool plot = true;
  bool svg = true;
};

struct RunConfig {
  Command command = Command::steady;
  dk::KitaevParams model{0.0, 64, dk::Boundary::antiperiodic};
  bool h_given = false;
  dk::BathSpec bath{};
  DensityConfig density;
  dk::CouplingProfile profile = dk::CouplingProfile::local(1.0);
  dk::QuadratureSpec quad{};
  SweepConfig sweep;
  OracleConfig oracle;
  OutputConfig output;
  unsigned seed = 12345;
  int threads = 0;  // 0: hardware concurrency

  /// Field values of the sweep: model.h alone, the explicit list, or the range.
  std::vector<double> h_values() const;
  /// Bath after resolving a spectral density (if any) into Markovian parameters.
  dk::BathSpec effective_bath() const;
  std::string file_prefix() const;
};

/// Raised for unparsable or invalid configuration; message carries the line when known.
class ConfigError : public dk::Error {
 public:
  explicit ConfigError(const std::string& what) : dk::Error(dk::ErrorKind::Config, what) {}
};

/// Parses JSON config text; `source` names the file in messages.
nlohmann::json parse_json(const std::string& text, const std::string& source = "<config>");

/// Dotted-path overrides such as {"model.h", "0.5"} applied on top of the JSON document.
/// The value is parsed as JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& doc, const std::string& path, const std::string& value);

/// Builds and validates a RunConfig. `text` is used to locate keys for line references;
/// errors on dotted keys listed in `flag_keys` are attributed to the command line.
RunConfig build_config(const nlohmann::json& doc, const std::string& text = {},
                       const std::string& source = "<config>",
                       const std::set<std::string>& flag_keys = {});

/// parse_json followed by build_config.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");

/// The effective configuration with every default filled in.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace dkcli
