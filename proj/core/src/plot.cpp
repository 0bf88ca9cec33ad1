// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "entlab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>

#include "entlab/error.hpp"
#include "entlab/numeric.hpp"

namespace entlab {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::vector<double> window_mean(const std::vector<double>& y, std::size_t window) {
  if (window <= 1) return y;
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    CompensatedSum acc;
    std::size_t n = 0;
    for (std::size_t j = i + 1 > window ? i + 1 - window : 0; j <= i; ++j) {
      if (std::isfinite(y[j])) {
        acc.add(y[j]);
        ++n;
      }
    }
    out[i] = n ? acc.value() / static_cast<double>(n) : std::nan("");
  }
  return out;
}

}  // namespace

CsvTable CsvTable::parse(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    throw InvalidInput("csv: empty input (no header)");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.header.size()) {
      throw InvalidInput("csv: row " + std::to_string(t.rows.size() + 1) +
                         " has " + std::to_string(row.size()) + " cells, header has " +
                         std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable CsvTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open csv: " + path);
  return parse(in);
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InvalidInput("csv: missing column '" + name + "'");
  const auto idx = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    const auto& cell = row[idx];
    if (cell.empty()) {
      out.push_back(std::nan(""));
      continue;
    }
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw InvalidInput("csv: column '" + name + "' has non-numeric cell '" + cell + "'");
    }
  }
  return out;
}

std::string render_svg(std::span<const PlotSeries> series, const PlotSpec& spec) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  std::vector<std::vector<double>> ys;
  for (const auto& s : series) {
    ys.push_back(window_mean(s.y, spec.window));
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(ys.back()[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, ys.back()[i]);
      ymax = std::max(ymax, ys.back()[i]);
    }
  }
  if (!std::isfinite(xmin)) throw InvalidInput("plot: no finite data points");
  if (xmax == xmin) { xmin -= 0.5; xmax += 0.5; }
  if (ymax == ymin) {
    const double pad = ymin == 0.0 ? 1.0 : std::fabs(ymin) * 0.05;
    ymin -= pad;
    ymax += pad;
  }

  const double left = 80, right = 170, top = 40, bottom = 50;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
      << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width << ' '
      << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const std::string title =
      spec.title.empty() ? spec.y_column + " vs " + spec.x_column : spec.title;
  svg << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-size=\"15\">" << escape(title) << "</text>\n";
  svg << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(pw)
      << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    svg << "<line x1=\"" << fmt(sx(fx)) << "\" y1=\"" << fmt(top + ph) << "\" x2=\""
        << fmt(sx(fx)) << "\" y2=\"" << fmt(top + ph + 5) << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << fmt(sx(fx)) << "\" y=\"" << fmt(top + ph + 18)
        << "\" text-anchor=\"middle\">" << tick_label(fx) << "</text>\n";
    svg << "<line x1=\"" << fmt(left - 5) << "\" y1=\"" << fmt(sy(fy)) << "\" x2=\""
        << fmt(left + pw) << "\" y2=\"" << fmt(sy(fy))
        << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(sy(fy) + 4)
        << "\" text-anchor=\"end\">" << tick_label(fy) << "</text>\n";
  }
  svg << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << spec.height - 10
      << "\" text-anchor=\"middle\">" << escape(spec.x_column) << "</text>\n";
  svg << "<text x=\"16\" y=\"" << fmt(top + ph / 2) << "\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 16 " << fmt(top + ph / 2) << ")\">"
      << escape(spec.y_column) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = kPalette[s % std::size(kPalette)];
    svg << "<polyline class=\"series\" fill=\"none\" stroke=\"" << colour
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (!std::isfinite(series[s].x[i]) || !std::isfinite(ys[s][i])) continue;
      svg << (first ? "" : " ") << fmt(sx(series[s].x[i])) << ','
          << fmt(sy(ys[s][i]));
      first = false;
    }
    svg << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    svg << "<line x1=\"" << fmt(left + pw + 12) << "\" y1=\"" << fmt(ly - 4)
        << "\" x2=\"" << fmt(left + pw + 32) << "\" y2=\"" << fmt(ly - 4)
        << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fmt(left + pw + 38) << "\" y=\"" << fmt(ly) << "\">"
        << escape(series[s].label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(std::span<const std::string> csv_paths,
               std::span<const std::string> labels, const PlotSpec& spec,
               const std::string& out_path) {
  if (csv_paths.empty()) throw InvalidInput("plot: no input files");
  if (!labels.empty() && labels.size() != csv_paths.size()) {
    throw InvalidInput("plot: label count must match input count");
  }
  std::vector<PlotSeries> series;
  for (std::size_t i = 0; i < csv_paths.size(); ++i) {
    const auto table = CsvTable::load(csv_paths[i]);
    if (table.rows.empty()) {
      throw InvalidInput("plot: " + csv_paths[i] + " has no data rows");
    }
    PlotSeries s;
    s.label = labels.empty() ? std::filesystem::path(csv_paths[i]).parent_path().filename().string() +
                                   "/" + std::filesystem::path(csv_paths[i]).stem().string()
                             : labels[i];
    s.x = table.column(spec.x_column);
    s.y = table.column(spec.y_column);
    series.push_back(std::move(s));
  }
  const std::string svg = render_svg(series, spec);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw InvalidInput("plot: cannot write " + out_path);
  out << svg;
}

}  // namespace entlab
