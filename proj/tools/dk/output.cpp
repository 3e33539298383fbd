#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "config.hpp"

namespace dkcli {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + path);
  return f;
}

std::string cell_text(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_double(*d);
  if (const long* l = std::get_if<long>(&c)) return std::to_string(*l);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

double cell_value(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return *d;
  if (const long* l = std::get_if<long>(&c)) return static_cast<double>(*l);
  return std::numeric_limits<double>::quiet_NaN();
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string py_str(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\\' || c == '\'') out += '\\';
    out += c;
  }
  return out + "'";
}

std::string short_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

}  // namespace

std::vector<double> Table::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError("no column " + name);
  const auto k = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(cell_value(r[k]));
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(const std::string& path, const Table& table, const std::string& comment) {
  auto f = open_out(path);
  f << "# " << comment << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) f << (i ? "," : "") << table.columns[i];
  f << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << cell_text(row[i]);
    f << "\n";
  }
}

void write_json(const std::string& path, const nlohmann::json& doc) {
  auto f = open_out(path);
  f << doc.dump(2) << "\n";
}

void write_plot_script(const std::string& path, const std::vector<Panel>& panels,
                       const std::string& comment, const std::string& image_name) {
  auto f = open_out(path);
  f << "#!/usr/bin/env python3\n";
  f << "# " << comment << "\n";
  f << "import os\n"
       "import numpy as np\n"
       "import matplotlib\n"
       "matplotlib.use('Agg')\n"
       "import matplotlib.pyplot as plt\n\n"
       "HERE = os.path.dirname(os.path.abspath(__file__))\n\n\n"
       "def load(name):\n"
       "    return np.genfromtxt(os.path.join(HERE, name), delimiter=',', names=True,\n"
       "                         skip_header=1, comments=None, dtype=None, encoding='utf-8')\n\n\n";
  f << "fig, axes = plt.subplots(" << panels.size() << ", 1, figsize=(7, "
    << 3.5 * static_cast<double>(panels.size()) << "), squeeze=False)\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const Panel& p = panels[i];
    f << "\nax = axes[" << i << "][0]\n";
    f << "data = load(" << py_str(p.csv) << ")\n";
    f << "groups = " << (p.group.empty() ? std::string("[None]")
                                           : "sorted(set(data[" + py_str(p.group) + "].tolist()))")
      << "\n";
    f << "for g in groups:\n";
    f << "    rows = data if g is None else data[data[" << py_str(p.group.empty() ? "x" : p.group)
      << "] == g]\n";
    f << "    for col in [";
    for (std::size_t k = 0; k < p.ys.size(); ++k) f << (k ? ", " : "") << py_str(p.ys[k]);
    f << "]:\n";
    f << "        y = rows[col]\n";
    if (p.logy) f << "        y = np.log10(np.abs(y))\n";
    f << "        label = col if g is None else '%s %s=%g' % (col, " << py_str(p.group) << ", g)\n";
    f << "        ax.plot(rows[" << py_str(p.x) << "], y, marker='.', label=label)\n";
    f << "ax.set_title(" << py_str(p.title) << ")\n";
    f << "ax.set_xlabel(" << py_str(p.xlabel.empty() ? p.x : p.xlabel) << ")\n";
    f << "ax.set_ylabel(" << py_str(p.logy ? "log10 |" + p.ylabel + "|" : p.ylabel) << ")\n";
    f << "ax.legend(fontsize='small')\n";
  }
  f << "\nfig.tight_layout()\n";
  f << "fig.savefig(os.path.join(HERE, " << py_str(image_name) << "))\n";
}

void write_svg(const std::string& path, const std::vector<Panel>& panels, const std::string& comment) {
  constexpr double W = 640, H = 320, ml = 70, mr = 20, mt = 30, mb = 45;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  auto f = open_out(path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
    << H * static_cast<double>(panels.size()) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  f << "<metadata>" << xml_escape(comment) << "</metadata>\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t pi_ = 0; pi_ < panels.size(); ++pi_) {
    const Panel& p = panels[pi_];
    const double y0 = H * static_cast<double>(pi_);
    const auto xs = p.table->column(p.x);
    const auto gs = p.group.empty() ? std::vector<double>(xs.size(), 0.0) : p.table->column(p.group);
    // curves keyed by (group value, column)
    std::map<std::pair<double, std::size_t>, std::vector<std::pair<double, double>>> curves;
    for (std::size_t k = 0; k < p.ys.size(); ++k) {
      const auto ys = p.table->column(p.ys[k]);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        double y = p.logy ? std::log10(std::abs(ys[i])) : ys[i];
        if (std::isfinite(xs[i]) && std::isfinite(y)) curves[{gs[i], k}].push_back({xs[i], y});
      }
    }
    double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
    for (const auto& [key, pts] : curves)
      for (auto [x, y] : pts) {
        xlo = std::min(xlo, x);
        xhi = std::max(xhi, x);
        ylo = std::min(ylo, y);
        yhi = std::max(yhi, y);
      }
    if (!(xhi > xlo)) { xlo -= 0.5; xhi += 0.5; }
    if (!(yhi > ylo)) { ylo -= 0.5; yhi += 0.5; }
    if (!std::isfinite(xlo)) { xlo = 0; xhi = 1; ylo = 0; yhi = 1; }
    const double pw = W - ml - mr, ph = H - mt - mb;
    auto X = [&](double x) { return ml + (x - xlo) / (xhi - xlo) * pw; };
    auto Y = [&](double y) { return y0 + mt + (1.0 - (y - ylo) / (yhi - ylo)) * ph; };
    f << "<text x=\"" << W / 2 << "\" y=\"" << y0 + 18 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << xml_escape(p.title) << "</text>\n";
    f << "<rect x=\"" << ml << "\" y=\"" << y0 + mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double xv = xlo + (xhi - xlo) * t / 4.0, yv = ylo + (yhi - ylo) * t / 4.0;
      f << "<text x=\"" << X(xv) << "\" y=\"" << y0 + mt + ph + 15 << "\" text-anchor=\"middle\">"
        << short_num(xv) << "</text>\n";
      f << "<text x=\"" << ml - 5 << "\" y=\"" << Y(yv) + 4 << "\" text-anchor=\"end\">"
        << short_num(yv) << "</text>\n";
    }
    f << "<text x=\"" << ml + pw / 2 << "\" y=\"" << y0 + H - 8 << "\" text-anchor=\"middle\">"
      << xml_escape(p.xlabel.empty() ? p.x : p.xlabel) << "</text>\n";
    f << "<text x=\"14\" y=\"" << y0 + mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << y0 + mt + ph / 2 << ")\">" << xml_escape(p.logy ? "log10 |" + p.ylabel + "|" : p.ylabel)
      << "</text>\n";
    std::size_t ci = 0;
    for (const auto& [key, pts] : curves) {
      f << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << colors[ci++ % 8] << "\" points=\"";
      for (auto [x, y] : pts) f << short_num(X(x)) << "," << short_num(Y(y)) << " ";
      f << "\"/>\n";
    }
  }
  f << "</svg>\n";
}

}  // namespace dkcli
