// Copyright 2026 The tunable-bus Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal SVG figures and CSV tables for the command-line tool. Plots are
// rendered from table contents only; nothing here recomputes physics.

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace tbus::cli {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  static CsvTable parse(const std::string& text, const std::string& source);
  std::string to_string() const;
  int column(const std::string& name) const;  // throws ConfigError when absent
  std::vector<double> numeric(const std::string& name) const;
  std::vector<std::string> strings(const std::string& name) const;
};

/// Shortest round-trip representation, stable across runs.
std::string fmt(double x);

struct Series {
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool line = false;
  double radius = 2.0;
  std::string label;
};

class Figure {
 public:
  Figure(std::string title, std::string xlabel, std::string ylabel);

  void add(Series s) { series_.push_back(std::move(s)); }
  void vertical_marker(double x, std::string label) {
    markers_.push_back({x, std::move(label)});
  }
  void log_x(bool on) { log_x_ = on; }
  void y_range(double lo, double hi) { y_range_ = {{lo, hi}}; }

  /// Heat map on a regular grid: z[row][col] with rows along y.
  void heat_map(std::vector<double> xs, std::vector<double> ys,
                std::vector<std::vector<double>> z, double zmin, double zmax, bool diverging);
  /// Categorical heat map (tick labels instead of numeric axes).
  void labeled_heat_map(std::vector<std::string> labels, std::vector<std::vector<double>> z,
                        double zmin, double zmax);

  std::string render() const;

 private:
  struct Marker {
    double x;
    std::string label;
  };
  struct Heat {
    std::vector<double> xs, ys;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> z;
    double zmin, zmax;
    bool diverging;
  };
  std::string title_, xlabel_, ylabel_;
  std::vector<Series> series_;
  std::vector<Marker> markers_;
  std::optional<std::array<double, 2>> y_range_;
  std::optional<Heat> heat_;
  bool log_x_ = false;
};

// Figure builders shared by `run` and `plot`.
std::string plot_chevron(const CsvTable& grid, std::optional<double> resonance_offset_mhz);
std::string plot_gate_scan(const CsvTable& scan);
std::string plot_decay(const CsvTable& data, const std::string& summary_json);
std::string plot_ptm(const CsvTable& ptm);

}  // namespace tbus::cli
