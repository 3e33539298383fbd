#pragma once

// Delimited text, JSON sidecars, plot scripts and SVG fallbacks.

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace dkcli {

using Cell = std::variant<double, long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  std::vector<double> column(const std::string& name) const;
};

/// Shortest round-trip-safe form at 17 significant digits; "nan", "inf", "-inf" otherwise.
std::string format_double(double x);

/// One comment line (without newline characters) followed by the header and rows.
void write_csv(const std::string& path, const Table& table, const std::string& comment);

void write_json(const std::string& path, const nlohmann::json& doc);

struct Panel {
  std::string title;
  std::string csv;       // file name relative to the output directory
  const Table* table = nullptr;
  std::string x;
  std::vector<std::string> ys;
  std::string group;     // column splitting the data into separate curves, may be empty
  bool logy = false;     // plot log10 |y|
  std::string xlabel;
  std::string ylabel;
};

/// Python/matplotlib script reading the CSV files next to it.
void write_plot_script(const std::string& path, const std::vector<Panel>& panels,
                       const std::string& comment, const std::string& image_name);

/// Standalone SVG with one chart per panel stacked vertically.
void write_svg(const std::string& path, const std::vector<Panel>& panels, const std::string& comment);

}  // namespace dkcli
