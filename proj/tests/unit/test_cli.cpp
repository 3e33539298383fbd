#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"
#include "pool.hpp"

using namespace dkcli;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("minimal config fills defaults") {
    const RunConfig c = parse_config(R"({"command": "steady", "h": 2})");
    CHECK(c.command == Command::steady);
    CHECK(c.model.h == 2.0);
    CHECK(c.h_values() == std::vector<double>{2.0});
    CHECK(c.profile.coefficients().size() == 1);
    CHECK(c.profile.at(0) == 1.0);
    CHECK(c.bath.Gamma == 0.1);
    CHECK(c.quad.abs_tol == 1e-10);
    CHECK(c.quad.rel_tol == 1e-10);
  }

  TEST_CASE("typed parse error names key and line") {
    const std::string msg = error_of("{\n  \"command\": \"steady\",\n  \"model\": {\n    \"h\": \"two\"\n  }\n}");
    CHECK(msg.find("cfg.json:4") != std::string::npos);
    CHECK(msg.find("model.h") != std::string::npos);
    CHECK(msg.find("expected number") != std::string::npos);
  }

  TEST_CASE("unknown key is named") {
    const std::string msg = error_of("{\"command\": \"steady\",\n \"bath\": {\"Gama\": 0.2}}");
    CHECK(msg.find("bath.Gama") != std::string::npos);
    CHECK(msg.find("unknown key") != std::string::npos);
    CHECK(msg.find("cfg.json:2") != std::string::npos);
  }

  TEST_CASE("out-of-range value reports the valid range") {
    const std::string msg = error_of(R"({"command": "steady", "bath": {"b": 1.5}})");
    CHECK(msg.find("[0, 1]") != std::string::npos);
    CHECK(!error_of(R"({"command": "evolve", "quadrature": {"abs_tol": 0}})").empty());
    CHECK(!error_of(R"({"command": "nope"})").empty());
    CHECK(!error_of(R"({"h": 1})").empty());
    CHECK(!error_of(R"({"command": "steady", "h": 1, "model": {"h": 2}})").empty());
  }

  TEST_CASE("malformed JSON reports a line") {
    const std::string msg = error_of("{\n\"command\": \"steady\",\n\"h\": }");
    CHECK(msg.find("cfg.json:3") != std::string::npos);
  }

  TEST_CASE("flag overrides file value and is echoed") {
    const std::string text = R"({"command": "steady", "model": {"h": 2}})";
    auto doc = parse_json(text);
    apply_override(doc, "model.h", "0.5");
    const RunConfig c = build_config(doc, text, "f", {"model.h"});
    CHECK(c.model.h == 0.5);
    CHECK(to_json(c)["model"]["h"].get<double>() == 0.5);
    apply_override(doc, "model.h", "two");
    try {
      build_config(doc, text, "f", {"model.h"});
      FAIL("expected error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("command line") != std::string::npos);
    }
  }

  TEST_CASE("effective config round-trips") {
    const RunConfig a = parse_config(
        R"({"command": "evolve", "h": 0.5, "profile": {"g": {"0": 1.0, "1": 0.25}},
            "sweep": {"d_max": 3, "rate": "half"}, "bath": {"beta": 2.0}})");
    CHECK(a.profile.at(-1) == 0.25);
    const RunConfig b = build_config(to_json(a));
    CHECK(to_json(a) == to_json(b));
  }

  TEST_CASE("asymmetric explicit coupling rejected") {
    CHECK(!error_of(R"({"command": "steady", "profile": {"g": {"1": 0.2, "-1": 0.3}}})").empty());
  }

  TEST_CASE("sweep range is inclusive") {
    const RunConfig c = parse_config(R"({"command": "scan-h", "sweep": {"h_from": 0, "h_to": 4, "h_step": 0.05}})");
    const auto hs = c.h_values();
    CHECK(hs.size() == 81);
    CHECK(hs.back() == doctest::Approx(4.0));
  }

  TEST_CASE("17 significant digits round-trip") {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
      const std::string s = format_double(x);
      CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
    CHECK(format_double(std::nan("")) == "nan");
  }

  TEST_CASE("worker pool keeps index order and rethrows the lowest failure") {
    const auto v = parallel_map<int>(100, 4, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == static_cast<int>(i * i));
    try {
      parallel_map<int>(50, 3, [](std::size_t i) -> int {
        if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
        return 0;
      });
      FAIL("expected error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "7");
    }
  }

  TEST_CASE("exit codes by error kind") {
    CHECK(exit_code_for(dk::ErrorKind::Config) == exit_config);
    CHECK(exit_code_for(dk::ErrorKind::QuadratureFailure) == exit_numerical);
    CHECK(exit_code_for(dk::ErrorKind::UnsupportedClosedForm) == exit_config);
  }

  TEST_CASE("steady run is byte-stable and embeds config and version") {
    const auto dir = std::filesystem::temp_directory_path() / "dk_cli_unit";
    std::filesystem::remove_all(dir);
    RunConfig c = parse_config(R"({"command": "steady", "sweep": {"h": [0.5, 2.0], "d_max": 2},
                                   "quadrature": {"method": "gauss"}})");
    c.output.dir = (dir / "a").string();
    std::ostringstream log;
    CHECK(run(c, log) == exit_ok);
    c.output.dir = (dir / "b").string();
    c.threads = 3;
    CHECK(run(c, log) == exit_ok);
    const std::string a = slurp(dir / "a" / "steady.csv"), b = slurp(dir / "b" / "steady.csv");
    const auto strip = [](std::string s) { return s.substr(s.find('\n')); };
    CHECK(strip(a) == strip(b));
    CHECK(a.rfind(std::string("# dk ") + DK_VERSION + " config=", 0) == 0);
    const auto side = nlohmann::json::parse(slurp(dir / "a" / "steady.json"));
    CHECK(side["version"] == DK_VERSION);
    CHECK(side["config"]["command"] == "steady");
    CHECK(std::filesystem::exists(dir / "a" / "steady_plot.py"));
    CHECK(std::filesystem::exists(dir / "a" / "steady.svg"));
    std::filesystem::remove_all(dir);
  }
}
