// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace entlab {

/// Header plus rows of a comma-separated file with no quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws InvalidInput for an empty input or a ragged row.
  static CsvTable parse(std::istream& in);
  static CsvTable load(const std::string& path);

  /// Numeric column; empty cells become NaN. Throws InvalidInput naming the
  /// column when it is absent.
  std::vector<double> column(const std::string& name) const;
};

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string x_column = "step";
  std::string y_column = "mean_token_entropy";
  std::string title;
  std::size_t window = 1;  // trailing window mean over y; 1 = raw values
  int width = 720;
  int height = 440;
};

/// Self-contained SVG line chart; NaN points are skipped. Output is a pure
/// function of the inputs.
std::string render_svg(std::span<const PlotSeries> series, const PlotSpec& spec);

/// Loads each CSV, extracts spec.x_column/spec.y_column and writes one SVG.
/// labels default to the file stems. Nothing is written on error.
void emit_plot(std::span<const std::string> csv_paths,
               std::span<const std::string> labels, const PlotSpec& spec,
               const std::string& out_path);

}  // namespace entlab
