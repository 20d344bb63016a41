#pragma once

// Plain-text artifacts: CSV with 17 significant digits and LF line endings,
// JSON sidecars, and dependency-free SVG line charts.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfbm/error.hpp"
#include "mfbm/field.hpp"
#include "mfbm/mercer.hpp"
#include "mfbm/rkhs.hpp"

namespace mfbm::io {

/// %.17g, with "nan", "inf", "-inf" spelled out.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_cells(header);
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    std::vector<std::string> v;
    (v.push_back(cell(cells)), ...);
    write_cells(v);
  }

  void row_cells(const std::vector<std::string>& cells) { write_cells(cells); }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(long long v) { return std::to_string(v); }
  static std::string cell(unsigned v) { return std::to_string(v); }
  static std::string cell(unsigned long v) { return std::to_string(v); }
  static std::string cell(unsigned long long v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  void write_cells(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::logic_error("CsvWriter: row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::ofstream out_;
  std::size_t columns_;
};

/// Minimal CSV reader: header plus rows of comma-separated fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DomainError("csv: missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (line.back() == ',') cells.emplace_back();
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Domain objects

/// One file per eigensystem: a "lambda" row with λ_1..λ_n in the value
/// columns, then one "node" row per quadrature node with r, w, ψ_1..ψ_n.
inline void write_eigensystem(const std::filesystem::path& path, const EigenSystem& es) {
  std::vector<std::string> header{"kind", "r", "w"};
  for (int n = 1; n <= es.size(); ++n) header.push_back("v" + std::to_string(n));
  CsvWriter w(path, header);
  std::vector<std::string> row{"lambda", "", ""};
  for (double l : es.lambdas) row.push_back(fmt(l));
  w.row_cells(row);
  for (int i = 0; i < es.grid_size(); ++i) {
    row = {"node", fmt(es.nodes[static_cast<std::size_t>(i)]), fmt(es.weights[static_cast<std::size_t>(i)])};
    for (int n = 0; n < es.size(); ++n) row.push_back(fmt(es.psi(i, n)));
    w.row_cells(row);
  }
}

inline nlohmann::ordered_json sample_metadata(const FieldSample& s) {
  nlohmann::ordered_json j;
  j["method"] = s.method;
  j["N"] = s.params.N;
  j["H"] = s.params.H;
  j["seed"] = s.seed;
  j["replica"] = s.replica;
  j["points"] = s.points.size();
  if (s.truncation) j["truncation"] = {{"m0", s.truncation->m0}, {"n0", s.truncation->n0}};
  if (s.band) j["band"] = {{"a", fmt(s.band->a)}, {"b", fmt(s.band->b)}};
  if (s.freq_grid) {
    j["freq_grid"] = {{"shells", s.freq_grid->shells},
                      {"directions", s.freq_grid->directions_for(s.params.N)},
                      {"k_min", s.freq_grid->k_min},
                      {"k_max", s.freq_grid->k_max}};
  }
  return j;
}

/// Samples sharing one point set: columns replica, x1..xN, value.
inline void write_field_samples(const std::filesystem::path& csv, const std::vector<FieldSample>& samples) {
  if (samples.empty()) throw DomainError("write_field_samples: nothing to write");
  const int N = samples.front().params.N;
  std::vector<std::string> header{"replica"};
  for (int d = 1; d <= N; ++d) header.push_back("x" + std::to_string(d));
  header.emplace_back("value");
  CsvWriter w(csv, header);
  for (const FieldSample& s : samples) {
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      std::vector<std::string> row{std::to_string(s.replica)};
      for (double c : s.points[i]) row.push_back(fmt(c));
      row.push_back(fmt(s.values[i]));
      w.row_cells(row);
    }
  }
  nlohmann::ordered_json meta = sample_metadata(samples.front());
  meta["replicas"] = samples.size();
  meta.erase("replica");
  std::filesystem::path side = csv;
  side.replace_extension(".json");
  write_json(side, meta);
}

/// Rows (m, n, l, value).
inline void write_coefficients(const std::filesystem::path& path, const RkhsFunction& f) {
  CsvWriter w(path, {"m", "n", "l", "value"});
  for (std::size_t k = 0; k < f.basis->size(); ++k) {
    const ModeIndex& mi = f.basis->modes[k];
    w.row(mi.m, mi.n, mi.l, f.coeffs(static_cast<Eigen::Index>(k)));
  }
}

struct KernelFixture {
  int N = 0;
  double H = 0.0;
  int m = 0;
  double r = 0.0;
  double s = 0.0;
  double b = 0.0;
};

inline void write_kernel_fixtures(const std::filesystem::path& path, const std::vector<KernelFixture>& rows) {
  CsvWriter w(path, {"N", "H", "m", "r", "s", "b_m"});
  for (const KernelFixture& f : rows) w.row(f.N, f.H, f.m, f.r, f.s, f.b);
}

inline std::vector<KernelFixture> read_kernel_fixtures(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t cN = t.column("N"), cH = t.column("H"), cm = t.column("m"), cr = t.column("r"),
                    cs = t.column("s"), cb = t.column("b_m");
  std::vector<KernelFixture> out;
  for (const auto& row : t.rows) {
    out.push_back({std::stoi(row[cN]), std::stod(row[cH]), std::stoi(row[cm]), std::stod(row[cr]),
                   std::stod(row[cs]), std::stod(row[cb])});
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Poly-line chart of one or more series. Log scale on x when requested.
inline void write_svg_lines(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
                            const std::vector<Series>& series, bool log_x = false) {
  constexpr double W = 640, Hgt = 400, L = 70, R = 160, T = 40, B = 50;
  auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || !std::isfinite(tx(s.x[i]))) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return Hgt - B - (y - y0) / (y1 - y0) * (Hgt - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  char buf[256];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hgt << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                L, T, W - L - R, Hgt - T - B);
  out << buf;
  for (int k = 0; k <= 4; ++k) {
    const double yv = y0 + (y1 - y0) * k / 4.0;
    const double xv = x0 + (x1 - x0) * k / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"end\" font-size=\"11\">%.3g</text>\n",
                  L - 6, py(yv) + 4, yv);
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\" font-size=\"11\">%.3g</text>\n",
                  L + (xv - x0) / (x1 - x0) * (W - L - R), Hgt - B + 16, log_x ? std::pow(10.0, xv) : xv);
    out << buf;
  }
  out << "<text x=\"" << (L + (W - L - R) / 2) << "\" y=\"" << (Hgt - 12)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* c = colors[s % 7];
    out << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (!std::isfinite(series[s].y[i])) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(series[s].x[i]), py(series[s].y[i]));
      out << buf;
    }
    out << "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"%s\" stroke-width=\"2\"/>"
                  "<text x=\"%g\" y=\"%g\" font-size=\"11\">",
                  W - R + 10, T + 14.0 + 16.0 * s, W - R + 30, T + 14.0 + 16.0 * s, c, W - R + 34, T + 18.0 + 16.0 * s);
    out << buf << series[s].name << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace mfbm::io
