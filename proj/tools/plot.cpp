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

#include "plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tbus/errors.hpp"

namespace tbus::cli {

namespace {

constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 78, kRight = 24, kTop = 40, kBottom = 58;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError(what + ": not a number: '" + s + "'");
  return x;
}

std::array<double, 2> bounds(const std::vector<double>& v) {
  double lo = INFINITY, hi = -INFINITY;
  for (double x : v)
    if (std::isfinite(x)) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  if (!std::isfinite(lo)) return {0.0, 1.0};
  if (hi - lo < 1e-300) return {lo - 0.5, hi + 0.5};
  const double pad = 0.04 * (hi - lo);
  return {lo - pad, hi + pad};
}

// Roughly five "nice" tick positions covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string rgb(double r, double g, double b) {
  char buf[16];
  auto c = [](double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255)); };
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c(r), c(g), c(b));
  return buf;
}

std::string colormap(double t, bool diverging) {
  t = std::clamp(t, 0.0, 1.0);
  if (diverging) {
    // blue - white - red
    if (t < 0.5) {
      const double u = t / 0.5;
      return rgb(0.13 + 0.87 * u, 0.30 + 0.70 * u, 0.67 + 0.33 * u);
    }
    const double u = (t - 0.5) / 0.5;
    return rgb(1.0 - 0.30 * u, 1.0 - 0.85 * u, 1.0 - 0.85 * u);
  }
  static const double stops[5][3] = {{0.27, 0.00, 0.33}, {0.23, 0.32, 0.55}, {0.13, 0.57, 0.55},
                                     {0.37, 0.79, 0.38}, {0.99, 0.91, 0.14}};
  const double s = t * 4.0;
  const int i = std::min(3, static_cast<int>(s));
  const double u = s - i;
  return rgb(stops[i][0] + u * (stops[i + 1][0] - stops[i][0]),
             stops[i][1] + u * (stops[i + 1][1] - stops[i][1]),
             stops[i][2] + u * (stops[i + 1][2] - stops[i][2]));
}

}  // namespace

// ---------------------------------------------------------------------------

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

CsvTable CsvTable::parse(const std::string& text, const std::string& source) {
  CsvTable t;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (t.header.empty()) {
      t.header = split(line);
      continue;
    }
    auto row = split(line);
    if (row.size() != t.header.size())
      throw ConfigError(source + ": row has " + std::to_string(row.size()) + " fields, header has " +
                        std::to_string(t.header.size()));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw ConfigError(source + ": empty table");
  return t;
}

std::string CsvTable::to_string() const {
  std::string out;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += r[i];
    }
    out += '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return out;
}

int CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ConfigError("table schema mismatch: no column '" + name + "'");
  return static_cast<int>(it - header.begin());
}

std::vector<double> CsvTable::numeric(const std::string& name) const {
  const int c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const std::string& s = r[static_cast<std::size_t>(c)];
    out.push_back(s == "nan" ? NAN : parse_double(s, name));
  }
  return out;
}

std::vector<std::string> CsvTable::strings(const std::string& name) const {
  const int c = column(name);
  std::vector<std::string> out;
  for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(c)]);
  return out;
}

// ---------------------------------------------------------------------------

Figure::Figure(std::string title, std::string xlabel, std::string ylabel)
    : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

void Figure::heat_map(std::vector<double> xs, std::vector<double> ys,
                      std::vector<std::vector<double>> z, double zmin, double zmax,
                      bool diverging) {
  heat_ = Heat{std::move(xs), std::move(ys), {}, std::move(z), zmin, zmax, diverging};
}

void Figure::labeled_heat_map(std::vector<std::string> labels, std::vector<std::vector<double>> z,
                              double zmin, double zmax) {
  heat_ = Heat{{}, {}, std::move(labels), std::move(z), zmin, zmax, true};
}

std::string Figure::render() const {
  std::ostringstream os;
  const double pw = kWidth - kLeft - kRight - (heat_ ? 60 : 0);
  const double ph = kHeight - kTop - kBottom;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
     << "\" font-family=\"Helvetica, Arial, sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(title_) << "</text>\n";

  auto colorbar = [&](double zmin, double zmax, bool diverging) {
    const double x0 = kLeft + pw + 18;
    for (int i = 0; i < 50; ++i) {
      const double t = (i + 0.5) / 50.0;
      os << "<rect x=\"" << x0 << "\" y=\"" << fmt(kTop + ph * (1 - (i + 1) / 50.0))
         << "\" width=\"14\" height=\"" << fmt(ph / 50.0 + 0.5) << "\" fill=\""
         << colormap(t, diverging) << "\"/>\n";
    }
    for (double v : {zmin, 0.5 * (zmin + zmax), zmax}) {
      const double y = kTop + ph * (1 - (v - zmin) / (zmax - zmin));
      os << "<text x=\"" << x0 + 18 << "\" y=\"" << fmt(y + 4) << "\">" << tick_label(v)
         << "</text>\n";
    }
  };

  if (heat_ && !heat_->labels.empty()) {
    const auto n = heat_->labels.size();
    const double cw = pw / static_cast<double>(n), chh = ph / static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        const double t = (heat_->z[r][c] - heat_->zmin) / (heat_->zmax - heat_->zmin);
        os << "<rect x=\"" << fmt(kLeft + c * cw) << "\" y=\"" << fmt(kTop + r * chh)
           << "\" width=\"" << fmt(cw) << "\" height=\"" << fmt(chh) << "\" fill=\""
           << colormap(t, true) << "\"/>\n";
      }
    for (std::size_t i = 0; i < n; ++i) {
      os << "<text x=\"" << fmt(kLeft + (i + 0.5) * cw) << "\" y=\"" << fmt(kTop + ph + 14)
         << "\" text-anchor=\"middle\" font-size=\"9\">" << escape(heat_->labels[i]) << "</text>\n";
      os << "<text x=\"" << fmt(kLeft - 4) << "\" y=\"" << fmt(kTop + (i + 0.5) * chh + 3)
         << "\" text-anchor=\"end\" font-size=\"9\">" << escape(heat_->labels[i]) << "</text>\n";
    }
    colorbar(heat_->zmin, heat_->zmax, true);
    os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 14
       << "\" text-anchor=\"middle\">" << escape(xlabel_) << "</text>\n";
    os << "</svg>\n";
    return os.str();
  }

  std::vector<double> allx, ally;
  for (const auto& s : series_) {
    for (double x : s.x) allx.push_back(log_x_ ? std::log10(x) : x);
    ally.insert(ally.end(), s.y.begin(), s.y.end());
  }
  if (heat_) {
    allx.insert(allx.end(), heat_->xs.begin(), heat_->xs.end());
    ally.insert(ally.end(), heat_->ys.begin(), heat_->ys.end());
  }
  for (const auto& m : markers_) allx.push_back(m.x);
  auto [x0, x1] = bounds(allx);
  auto [y0, y1] = y_range_ ? *y_range_ : bounds(ally);
  if (heat_) {
    auto half = [](const std::vector<double>& v) {
      return v.size() > 1 ? 0.5 * (v[1] - v[0]) : 0.5;
    };
    x0 = heat_->xs.front() - half(heat_->xs);
    x1 = heat_->xs.back() + half(heat_->xs);
    y0 = heat_->ys.front() - half(heat_->ys);
    y1 = heat_->ys.back() + half(heat_->ys);
  }
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

  if (heat_) {
    const auto& h = *heat_;
    const double cw = pw / static_cast<double>(h.xs.size());
    const double chh = ph / static_cast<double>(h.ys.size());
    for (std::size_t r = 0; r < h.ys.size(); ++r)
      for (std::size_t c = 0; c < h.xs.size(); ++c) {
        const double t = (h.z[r][c] - h.zmin) / (h.zmax - h.zmin);
        os << "<rect x=\"" << fmt(px(h.xs[c]) - cw / 2) << "\" y=\"" << fmt(py(h.ys[r]) - chh / 2)
           << "\" width=\"" << fmt(cw + 0.3) << "\" height=\"" << fmt(chh + 0.3) << "\" fill=\""
           << colormap(t, h.diverging) << "\"/>\n";
      }
    colorbar(h.zmin, h.zmax, h.diverging);
  }

  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << fmt(pw) << "\" height=\""
     << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(x0, x1)) {
    os << "<line x1=\"" << fmt(px(t)) << "\" x2=\"" << fmt(px(t)) << "\" y1=\"" << fmt(kTop + ph)
       << "\" y2=\"" << fmt(kTop + ph + 5) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << fmt(px(t)) << "\" y=\"" << fmt(kTop + ph + 18)
       << "\" text-anchor=\"middle\">" << tick_label(log_x_ ? std::pow(10.0, t) : t) << "</text>\n";
  }
  for (double t : ticks(y0, y1)) {
    os << "<line x1=\"" << fmt(kLeft - 5) << "\" x2=\"" << kLeft << "\" y1=\"" << fmt(py(t))
       << "\" y2=\"" << fmt(py(t)) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(py(t) + 4)
       << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  os << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << kHeight - 14
     << "\" text-anchor=\"middle\">" << escape(xlabel_) << "</text>\n"
     << "<text transform=\"translate(18," << fmt(kTop + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(ylabel_) << "</text>\n";

  os << "<g clip-path=\"none\">\n";
  for (const auto& s : series_) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
        pts.emplace_back(px(log_x_ ? std::log10(s.x[i]) : s.x[i]), py(s.y[i]));
    if (s.line) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\" points=\"";
      for (const auto& [x, y] : pts) os << fmt(x) << ',' << fmt(y) << ' ';
      os << "\"/>\n";
    } else {
      for (const auto& [x, y] : pts)
        os << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"" << s.radius
           << "\" fill=\"" << s.color << "\" fill-opacity=\"0.6\"/>\n";
    }
  }
  for (const auto& m : markers_) {
    os << "<line x1=\"" << fmt(px(m.x)) << "\" x2=\"" << fmt(px(m.x)) << "\" y1=\"" << kTop
       << "\" y2=\"" << fmt(kTop + ph) << "\" stroke=\"white\" stroke-dasharray=\"4,3\"/>\n"
       << "<text x=\"" << fmt(px(m.x) + 4) << "\" y=\"" << kTop + 14 << "\" fill=\"black\">"
       << escape(m.label) << "</text>\n";
  }
  os << "</g>\n";

  double ly = kTop + 16;
  for (const auto& s : series_) {
    if (s.label.empty()) continue;
    os << "<rect x=\"" << fmt(kLeft + pw - 150) << "\" y=\"" << fmt(ly - 9)
       << "\" width=\"10\" height=\"10\" fill=\"" << s.color << "\"/>\n"
       << "<text x=\"" << fmt(kLeft + pw - 134) << "\" y=\"" << fmt(ly) << "\">" << escape(s.label)
       << "</text>\n";
    ly += 16;
  }
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------

std::string plot_chevron(const CsvTable& grid, std::optional<double> resonance_offset_mhz) {
  const auto om = grid.numeric("omega_offset_mhz");
  const auto w = grid.numeric("width_ns");
  const auto p = grid.numeric("transfer");
  const std::set<double> oset(om.begin(), om.end()), wset(w.begin(), w.end());
  const std::vector<double> xs(oset.begin(), oset.end()), ys(wset.begin(), wset.end());
  std::map<double, std::size_t> xi, yi;
  for (std::size_t i = 0; i < xs.size(); ++i) xi[xs[i]] = i;
  for (std::size_t i = 0; i < ys.size(); ++i) yi[ys[i]] = i;
  if (xs.size() * ys.size() != p.size())
    throw ConfigError("chevron table is not a complete grid");
  std::vector<std::vector<double>> z(ys.size(), std::vector<double>(xs.size(), 0.0));
  for (std::size_t k = 0; k < p.size(); ++k) z[yi[w[k]]][xi[om[k]]] = p[k];
  Figure f("Exchange chevron", "carrier detuning from static qubit detuning (MHz)",
           "pulse width (ns)");
  f.heat_map(xs, ys, std::move(z), 0.0, 1.0, false);
  if (resonance_offset_mhz) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "resonance %.2f MHz", *resonance_offset_mhz);
    f.vertical_marker(*resonance_offset_mhz, buf);
  }
  return f.render();
}

std::string plot_gate_scan(const CsvTable& scan) {
  const auto w = scan.numeric("width_ns");
  const auto e = scan.numeric("error");
  const auto l = scan.numeric("leakage");
  Figure f("Gate error versus pulse width", "pulse width (ns)", "error");
  f.add({w, e, "#1f77b4", true, 2.0, "1 - F (decoherence on)"});
  f.add({w, e, "#1f77b4", false, 3.0, ""});
  f.add({w, l, "#d62728", true, 2.0, "leakage"});
  f.add({w, l, "#d62728", false, 3.0, ""});
  return f.render();
}

std::string plot_decay(const CsvTable& data, const std::string& summary_json) {
  const auto len = data.numeric("length");
  const auto val = data.numeric("value");
  const auto series = data.strings("series");
  nlohmann::json summary;
  try {
    summary = nlohmann::json::parse(summary_json);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("decay summary is not valid JSON: ") + e.what());
  }
  const std::string title = summary.value("title", std::string("Randomized benchmarking"));
  const std::string ylabel = summary.value("ylabel", std::string("survival probability"));
  Figure f(title, "number of Cliffords", ylabel);
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::vector<std::string> names;
  for (const auto& s : series)
    if (std::find(names.begin(), names.end(), s) == names.end()) names.push_back(s);
  double mmax = 1.0;
  for (double m : len) mmax = std::max(mmax, m);
  for (std::size_t k = 0; k < names.size(); ++k) {
    Series pts;
    pts.color = palette[k % 5];
    for (std::size_t i = 0; i < len.size(); ++i)
      if (series[i] == names[k]) {
        pts.x.push_back(len[i]);
        pts.y.push_back(val[i]);
      }
    f.add(pts);
    if (summary.contains("fits") && summary["fits"].contains(names[k])) {
      const auto& fit = summary["fits"][names[k]];
      const double a = fit.at("a"), alpha = fit.at("alpha"), b = fit.at("b");
      const double scale = fit.value("x_scale", 1.0);
      Series curve;
      curve.line = true;
      curve.color = pts.color;
      curve.label = names[k];
      for (int i = 0; i <= 200; ++i) {
        const double m = mmax * i / 200.0;
        curve.x.push_back(m);
        curve.y.push_back(a * std::pow(alpha, scale * m) + b);
      }
      f.add(curve);
    }
  }
  return f.render();
}

std::string plot_ptm(const CsvTable& ptm) {
  const auto labels = ptm.strings("row");
  if (ptm.header.size() != labels.size() + 1) throw ConfigError("PTM table must be square");
  std::vector<std::vector<double>> z;
  for (std::size_t r = 0; r < ptm.rows.size(); ++r) {
    std::vector<double> row;
    for (const auto& l : labels) {
      const std::string& s = ptm.rows[r][static_cast<std::size_t>(ptm.column(l))];
      row.push_back(parse_double(s, "ptm entry"));
    }
    z.push_back(std::move(row));
  }
  if (z.size() != labels.size()) throw ConfigError("PTM table must be square");
  Figure f("Pauli transfer matrix", "input Pauli (columns), output Pauli (rows)", "");
  f.labeled_heat_map(labels, std::move(z), -1.0, 1.0);
  return f.render();
}

}  // namespace tbus::cli
