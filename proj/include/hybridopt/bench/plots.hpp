/*
 Copyright 2026 The hybridopt Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef HYBRIDOPT_BENCH_PLOTS_HPP
#define HYBRIDOPT_BENCH_PLOTS_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "hybridopt/bench/experiment.hpp"

// Self-contained SVG line plots of run artifacts.
namespace hybridopt::bench {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;  // empty cells are NaN

  /// InvalidInput when the column is absent.
  std::vector<double> column(const std::string& name) const;
  bool has(const std::string& name) const;
};

/// InvalidInput when the file is missing or malformed.
CsvTable read_csv(const std::filesystem::path& path);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  /// Drawn dashed with class "reference" instead of "series".
  bool reference = false;
};

/// Straight overlay such as a switching interface.
struct Guide {
  double x0, y0, x1, y1;
};

struct Figure {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<Series> series;
  std::vector<Guide> guides;
};

std::string render_svg(const Figure& fig);

/// Portion of {x : n . x + c = 0} inside [lo, hi] (2-D); false if it misses.
bool clip_line(const AffineBoundary& b, const StateVector& lo, const StateVector& hi, Guide& out);

struct PlotOutput {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> notices;
};

/// phase.svg, control.svg and cost.svg in the summary's root, from the
/// trajectory and curve artifacts it lists. Plots without data are skipped
/// with a notice.
PlotOutput emit_plots(const RunSummary& summary);

}  // namespace hybridopt::bench

#endif  // HYBRIDOPT_BENCH_PLOTS_HPP
