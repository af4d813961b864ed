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

#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "plot.hpp"
#include "tbus/benchmarking.hpp"
#include "tbus/cliffords.hpp"
#include "tbus/dynamics.hpp"
#include "tbus/errors.hpp"
#include "tbus/hamiltonian.hpp"
#include "tbus/tomography.hpp"
#include "tbus/units.hpp"

namespace tbus::cli {

namespace {

using nlohmann::json;
using units::mhz;
using units::ns;
using units::to_mhz;
using units::to_ns;

// --- shared parameter helpers -----------------------------------------------

std::vector<double> linspace(double a, double b, int n) {
  if (n < 1) throw ConfigError("grid needs at least one point");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

int positive_int(const KeyValueTable& t, const std::string& key, long long fallback) {
  const long long v = t.integer(key, fallback);
  if (v < 1 || v > 100'000'000) throw ConfigError(key + ": must be a positive integer");
  return static_cast<int>(v);
}

bool flag(const KeyValueTable& t, const std::string& key, bool fallback) {
  const std::string v = t.text(key, fallback ? "1" : "0");
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw ConfigError(key + ": expected 0/1, got '" + v + "'");
}

double fraction(const KeyValueTable& t, const std::string& key, double fallback, double lo,
                double hi) {
  const double v = t.number(key, fallback);
  if (!(v >= lo && v <= hi))
    throw ConfigError(key + ": must lie in [" + fmt(lo) + ", " + fmt(hi) + "]");
  return v;
}

std::uint64_t require_seed(const RunContext& c, const std::string& kind) {
  if (!c.seed) throw ConfigError("seed: --seed is required for " + kind);
  return *c.seed;
}

ReadoutModel readout_from(const KeyValueTable& t, double f1, double f2) {
  ReadoutModel r;
  r.fidelity = {t.number("readout_q1", f1), t.number("readout_q2", f2)};
  try {
    r.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("readout_q1/readout_q2: ") + e.what());
  }
  return r;
}

std::vector<int> lengths_from(const KeyValueTable& t, const std::vector<int>& fallback) {
  std::vector<double> d(fallback.begin(), fallback.end());
  std::vector<int> out;
  for (double x : t.numbers("lengths", d)) {
    if (x < 1 || x != std::floor(x)) throw ConfigError("lengths: entries must be positive integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

std::optional<LindbladSpec> decoherence(const RunContext& c, bool on) {
  if (!on) return std::nullopt;
  return LindbladSpec::from_device(c.device.params);
}

json pulse_json(const FluxPulse& p) {
  return {{"theta_phi0", p.theta},           {"delta_phi0", p.delta},
          {"omega_phi_mhz", to_mhz(p.omega_phi)}, {"phase_rad", p.phase},
          {"flat_ns", to_ns(p.flat_duration)}, {"edge_sigma_ns", to_ns(p.edge_sigma)},
          {"edge_extent", p.edge_extent},      {"total_ns", to_ns(p.total_duration())}};
}

json gate_json(const CalibratedGate& g) {
  return {{"target", to_string(g.target)},
          {"pulse", pulse_json(g.pulse)},
          {"z_phases_rad", {g.z_phases[0], g.z_phases[1]}},
          {"overlap", g.achieved_overlap},
          {"coherent_fidelity", g.achieved_fidelity},
          {"below_threshold", g.below_threshold}};
}

json fit_json(const DecayFit& f, double x_scale = 1.0) {
  return {{"a", f.a},
          {"alpha", f.alpha},
          {"b", f.b},
          {"stderr", {f.standard_error[0], f.standard_error[1], f.standard_error[2]}},
          {"degenerate", f.degenerate},
          {"x_scale", x_scale}};
}

std::string ptm_csv(const PauliTransferMatrix& ptm) {
  CsvTable t;
  t.header.push_back("row");
  for (int j = 0; j < 16; ++j) t.header.push_back(pauli_label(j, 2));
  for (int i = 0; i < 16; ++i) {
    std::vector<std::string> row{pauli_label(i, 2)};
    for (int j = 0; j < 16; ++j) row.push_back(fmt(ptm.matrix()(i, j)));
    t.rows.push_back(std::move(row));
  }
  return t.to_string();
}

std::string density_csv(const CMatrix& linear, const CMatrix& mle) {
  CsvTable t;
  t.header = {"row", "col", "re_linear", "im_linear", "re_mle", "im_mle"};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      t.rows.push_back({std::to_string(i), std::to_string(j), fmt(linear(i, j).real()),
                        fmt(linear(i, j).imag()), fmt(mle(i, j).real()), fmt(mle(i, j).imag())});
  return t.to_string();
}

CMatrix basis_projector(const std::string& label) {
  static const std::map<std::string, int> index{{"00", 0}, {"01", 1}, {"10", 2}, {"11", 3}};
  const auto it = index.find(label);
  if (it == index.end()) throw ConfigError("input: expected one of 00, 01, 10, 11");
  CMatrix rho = CMatrix::Zero(4, 4);
  rho(it->second, it->second) = 1.0;
  return rho;
}

// Gate from the calibration store when one matches, otherwise calibrated now.
CalibratedGate obtain_gate(RunContext& c, Artifacts& out, const Propagator& prop, GateTarget target,
                           double width, std::optional<double> fixed_delta = std::nullopt) {
  if (c.calibration_in) {
    for (const auto& g : load_calibrations(*c.calibration_in, c.device.params)) {
      if (g.target != target) continue;
      if (fixed_delta ? std::abs(g.pulse.delta - *fixed_delta) < 1e-9
                      : std::abs(g.pulse.total_duration() - width) < ns(0.05))
        return g;
    }
    throw ConfigError("calibration: no stored " + to_string(target) + " gate matches the request");
  }
  CalibratedGate g = fixed_delta ? calibrate_gate_at_amplitude(prop, *fixed_delta, target)
                                 : calibrate_gate(prop, width, target);
  out.calibrated.push_back(g);
  return g;
}

// --- decay tables -------------------------------------------------------------

struct DecaySeries {
  std::string name;
  const std::vector<std::vector<double>>* values;
};

std::string decay_csv(const std::vector<int>& lengths, const std::vector<DecaySeries>& series) {
  CsvTable t;
  t.header = {"length", "seed", "series", "value"};
  for (const auto& s : series)
    for (std::size_t li = 0; li < lengths.size(); ++li)
      for (std::size_t si = 0; si < (*s.values)[li].size(); ++si)
        t.rows.push_back({std::to_string(lengths[li]), std::to_string(si), s.name,
                          fmt((*s.values)[li][si])});
  return t.to_string();
}

void add_decay(Artifacts& out, const std::string& stem, const std::string& csv, json summary) {
  const std::string text = summary.dump(2) + "\n";
  out.add(stem + ".csv", csv);
  out.add(stem + ".json", text);
  out.add(stem + ".svg", plot_decay(CsvTable::parse(csv, stem + ".csv"), text));
  out.summary = std::move(summary);
}

// Noise for the RB family, read from the parameter table.
struct NoiseRequest {
  std::string kind;  // gate | depolarizing | ideal
  double epc = 0.02;
  bool time_domain = false;
  bool with_decoherence = true;
  double width = ns(183.0);

  static NoiseRequest read(const KeyValueTable& t, bool allow_ptm) {
    NoiseRequest r;
    r.kind = t.text("noise", "gate");
    if (r.kind != "gate" && r.kind != "depolarizing" && r.kind != "ideal")
      throw ConfigError("noise: expected gate, depolarizing or ideal");
    r.epc = fraction(t, "epc", 0.02, 0.0, 0.75);
    const std::string mode = t.text("mode", allow_ptm ? "ptm" : "time-domain");
    if (mode != "ptm" && mode != "time-domain") throw ConfigError("mode: expected ptm or time-domain");
    r.time_domain = mode == "time-domain";
    if (!allow_ptm && !r.time_domain) throw ConfigError("mode: this experiment needs time-domain");
    if (r.time_domain && r.kind != "gate")
      throw ConfigError("noise: time-domain mode simulates the calibrated gate only");
    r.with_decoherence = flag(t, "decoherence", true);
    r.width = ns(t.number("width_ns", 183.0));
    return r;
  }
};

NoiseModel build_noise(const NoiseRequest& r, RunContext& c, Artifacts& out, json& info) {
  info["noise"] = r.kind;
  if (r.kind == "ideal") return NoiseModel::ideal();
  if (r.kind == "depolarizing") {
    info["injected_error_per_clifford"] = r.epc;
    return NoiseModel::depolarizing(r.epc);
  }
  const Propagator prop(c.device.params, c.device.bias);
  const CalibratedGate g = obtain_gate(c, out, prop, GateTarget::kISwap, r.width);
  const auto lind = decoherence(c, r.with_decoherence);
  info["gate"] = gate_json(g);
  info["mode"] = r.time_domain ? "time-domain" : "ptm";
  if (r.time_domain)
    return NoiseModel::time_domain(
        std::make_shared<PulseProcess>(prop, g.pulse, lind, g.z_phases[0], g.z_phases[1]));
  const PauliTransferMatrix ptm = build_gate_ptm(prop, g, lind);
  info["gate_average_fidelity"] = average_gate_fidelity(ptm, ideal_gate(GateTarget::kISwap));
  return NoiseModel::from_gate(ptm);
}

// --- experiments --------------------------------------------------------------------

Artifacts chevron(RunContext& c) {
  const auto& t = c.params;
  const double delta = t.number("delta", 0.153);
  const double span = t.number("omega_span_mhz", 10.0);
  const int nom = positive_int(t, "omega_points", 21);
  const double wmin = t.number("width_min_ns", 50.0), wmax = t.number("width_max_ns", 350.0);
  const int nw = positive_int(t, "width_points", 31);
  t.reject_unused("chevron");
  if (!(wmin > 0 && wmax >= wmin)) throw ConfigError("width_min_ns/width_max_ns: need 0 < min <= max");
  const double edges = to_ns(2.0 * FluxPulse{}.edge_duration());
  if (wmin < edges)
    throw ConfigError("width_min_ns: must cover the two pulse edges (" + fmt(edges) + " ns)");

  const EffectiveModel em = effective_model(c.device.params, c.device.bias, delta);
  std::vector<double> omegas;
  for (double off : linspace(-span, span, nom)) omegas.push_back(em.bare_detuning + mhz(off));
  std::vector<double> widths;
  for (double w : linspace(wmin, wmax, nw)) widths.push_back(ns(w));
  FluxPulse shape;
  shape.theta = c.device.bias;
  shape.delta = delta;
  const Propagator prop(c.device.params, c.device.bias);
  const ChevronMap map = chevron_scan(prop, shape, omegas, widths);

  CsvTable grid;
  grid.header = {"omega_offset_mhz", "width_ns", "transfer"};
  for (std::size_t i = 0; i < omegas.size(); ++i)
    for (std::size_t j = 0; j < widths.size(); ++j)
      grid.rows.push_back({fmt(to_mhz(omegas[i] - em.bare_detuning)), fmt(to_ns(widths[j])),
                           fmt(map.transfer(static_cast<Eigen::Index>(i),
                                            static_cast<Eigen::Index>(j)))});
  const double offset = to_mhz(map.resonance - em.bare_detuning);
  Artifacts out;
  out.summary = {{"experiment", "chevron"},
                 {"delta_phi0", delta},
                 {"static_detuning_mhz", to_mhz(em.bare_detuning)},
                 {"model_detuning_mhz", to_mhz(em.detuning)},
                 {"resonance_mhz", to_mhz(map.resonance)},
                 {"resonance_offset_mhz", offset},
                 {"resonance_half_width_mhz", to_mhz(map.resonance_width)}};
  const std::string csv = grid.to_string();
  out.add("chevron.csv", csv);
  out.add("chevron.json", out.summary.dump(2) + "\n");
  out.add("chevron.svg", plot_chevron(CsvTable::parse(csv, "chevron.csv"), offset));
  return out;
}

Artifacts ramsey(RunContext& c) {
  const auto& t = c.params;
  const double delta = t.number("delta", 0.153);
  const double offset = t.number("omega_offset_mhz", 0.0);
  const double edge = t.number("edge_sigma_ns", 8.3);
  std::vector<double> durations;
  for (double d : t.numbers("durations_ns", {0, 20, 40, 60, 80, 100})) {
    if (d < 0) throw ConfigError("durations_ns: entries must be non-negative");
    durations.push_back(ns(d));
  }
  t.reject_unused("ramsey-shift");
  if (durations.size() < 3) throw ConfigError("durations_ns: need at least three entries");

  const EffectiveModel em = effective_model(c.device.params, c.device.bias, delta);
  FluxPulse pulse;
  pulse.theta = c.device.bias;
  pulse.delta = delta;
  pulse.edge_sigma = ns(edge);
  pulse.omega_phi = em.detuning + mhz(offset);
  const Propagator prop(c.device.params, c.device.bias);
  const auto predicted = drive_induced_shift(c.device.params, c.device.bias, delta);

  CsvTable table;
  table.header = {"qubit", "flat_ns", "phase_rad", "excited_population"};
  Artifacts out;
  out.summary = {{"experiment", "ramsey-shift"}, {"delta_phi0", delta}, {"pulse", pulse_json(pulse)}};
  for (int q = 0; q < 2; ++q) {
    const RamseyResult r = ramsey_shift(prop, pulse, q, durations);
    for (std::size_t k = 0; k < r.flat_durations.size(); ++k)
      table.rows.push_back({std::to_string(q + 1), fmt(to_ns(r.flat_durations[k])), fmt(r.phases[k]),
                            fmt(r.excited_population[k])});
    out.summary["q" + std::to_string(q + 1)] = {
        {"shift_mhz", to_mhz(r.shift)},
        {"shift_uncertainty_mhz", to_mhz(r.shift_uncertainty)},
        {"predicted_shift_mhz", to_mhz(predicted[static_cast<std::size_t>(q)])}};
  }
  out.add("ramsey.csv", table.to_string());
  out.add("ramsey.json", out.summary.dump(2) + "\n");
  return out;
}

Artifacts calibrate(RunContext& c) {
  const auto& t = c.params;
  const GateTarget target = parse_gate_target(t.text("target", "iswap"));
  const double width = ns(t.number("width_ns", 183.0));
  const std::optional<double> delta =
      t.contains("delta") ? std::optional<double>(t.number("delta")) : std::nullopt;
  const bool deco = flag(t, "decoherence", true);
  t.reject_unused("calibrate");

  const Propagator prop(c.device.params, c.device.bias);
  Artifacts out;
  const CalibratedGate g =
      delta ? calibrate_gate_at_amplitude(prop, *delta, target) : calibrate_gate(prop, width, target);
  out.calibrated.push_back(g);
  const PauliTransferMatrix ptm = build_gate_ptm(prop, g, decoherence(c, deco));
  out.summary = {{"experiment", "calibrate"},
                 {"gate", gate_json(g)},
                 {"decoherence", deco},
                 {"average_fidelity", average_gate_fidelity(ptm, ideal_gate(target))},
                 {"trace_retention", ptm.trace_retention()}};
  const std::string csv = ptm_csv(ptm);
  out.add("calibration.json", out.summary.dump(2) + "\n");
  out.add("ptm.csv", csv);
  out.add("ptm.svg", plot_ptm(CsvTable::parse(csv, "ptm.csv")));
  return out;
}

Artifacts gate_scan(RunContext& c) {
  const auto& t = c.params;
  const GateTarget target = parse_gate_target(t.text("target", "iswap"));
  std::vector<double> widths;
  for (double w : t.numbers("widths_ns", {100, 130, 150, 183, 220, 280})) widths.push_back(ns(w));
  const bool deco = flag(t, "decoherence", true);
  t.reject_unused("gate-scan");

  const Propagator prop(c.device.params, c.device.bias);
  const double reference = effective_model(c.device.params, c.device.bias, 0.0).bare_detuning;
  const auto scan = gate_error_vs_width(prop, widths, decoherence(c, deco), target);
  CsvTable table;
  table.header = {"width_ns", "ok", "error", "leakage", "coherent_error", "delta_phi0",
                  "omega_offset_mhz"};
  Artifacts out;
  json points = json::array();
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const auto& p = scan[i];
    const double nan = std::nan("");
    table.rows.push_back({fmt(to_ns(p.width)), p.ok ? "1" : "0", fmt(p.ok ? p.error : nan),
                          fmt(p.ok ? p.leakage : nan), fmt(p.ok ? p.coherent_error : nan),
                          fmt(p.ok ? p.gate.pulse.delta : nan),
                          fmt(p.ok ? to_mhz(p.gate.pulse.omega_phi - reference) : nan)});
    json j = {{"width_ns", to_ns(p.width)}, {"ok", p.ok}};
    if (p.ok) {
      j["error"] = p.error;
      j["leakage"] = p.leakage;
      j["gate"] = gate_json(p.gate);
      out.calibrated.push_back(p.gate);
      if (!best || p.error < scan[*best].error) best = i;
    } else {
      j["failure"] = p.failure;
    }
    points.push_back(std::move(j));
  }
  out.summary = {{"experiment", "gate-scan"}, {"target", to_string(target)},
                 {"decoherence", deco},       {"points", points}};
  if (best) out.summary["minimum_width_ns"] = to_ns(scan[*best].width);
  const std::string csv = table.to_string();
  out.add("gate_scan.csv", csv);
  out.add("gate_scan.json", out.summary.dump(2) + "\n");
  out.add("gate_scan.svg", plot_gate_scan(CsvTable::parse(csv, "gate_scan.csv")));
  return out;
}

RBOptions rb_options(const RunContext& c, int default_seeds, const std::string& kind) {
  RBOptions o;
  o.lengths = lengths_from(c.params, o.lengths);
  o.seeds = positive_int(c.params, "seeds", default_seeds);
  o.master_seed = require_seed(c, kind);
  o.validate();
  return o;
}

Artifacts rb_standard(RunContext& c) {
  const NoiseRequest nr = NoiseRequest::read(c.params, true);
  const RBOptions o = rb_options(c, 20, "rb-standard");
  c.params.reject_unused("rb-standard");
  Artifacts out;
  json info = {{"experiment", "rb-standard"}};
  const NoiseModel noise = build_noise(nr, c, out, info);
  const RBResult r = run_standard_rb(noise, o);
  info["fits"] = {{"joint", fit_json(r.fit)}, {"q1", fit_json(r.qubit_fits[0])},
                  {"q2", fit_json(r.qubit_fits[1])}};
  info["error_per_clifford"] = r.error_per_clifford;
  info["error_per_clifford_stderr"] = r.error_per_clifford_stderr;
  info["qubit_error_per_clifford"] = {r.qubit_error_per_clifford[0], r.qubit_error_per_clifford[1]};
  info["iswaps_per_clifford"] = r.iswaps_per_clifford;
  info["error_per_gate"] = r.error_per_gate;
  info["title"] = "Standard randomized benchmarking";
  add_decay(out, "rb_standard",
            decay_csv(r.lengths, {{"joint", &r.survival}, {"q1", &r.qubit_survival[0]},
                                  {"q2", &r.qubit_survival[1]}}),
            std::move(info));
  return out;
}

Artifacts rb_interleaved(RunContext& c) {
  const NoiseRequest nr = NoiseRequest::read(c.params, true);
  const std::string which = c.params.text("interleave", "iswap");
  if (which != "iswap" && which != "identity")
    throw ConfigError("interleave: expected iswap or identity");
  const RBOptions o = rb_options(c, 20, "rb-interleaved");
  c.params.reject_unused("rb-interleaved");
  Artifacts out;
  json info = {{"experiment", "rb-interleaved"}, {"interleave", which}};
  const NoiseModel noise = build_noise(nr, c, out, info);
  const CliffordGroup& g = CliffordGroup::two_qubit();
  const InterleavedGate gate{which == "iswap" ? g.iswap_element() : g.identity(), std::nullopt};
  const InterleavedResult r = run_interleaved_rb(noise, gate, o);
  info["fits"] = {{"reference", fit_json(r.reference.fit)},
                  {"interleaved", fit_json(r.interleaved.fit)}};
  info["reference_error_per_clifford"] = r.reference.error_per_clifford;
  info["reference_error_per_gate"] = r.reference.error_per_gate;
  info["gate_error"] = r.gate_error;
  info["gate_error_stderr"] = r.gate_error_stderr;
  info["systematic_bounds"] = {r.lower_bound, r.upper_bound};
  info["unphysical"] = r.unphysical;
  info["title"] = "Interleaved randomized benchmarking";
  add_decay(out, "rb_interleaved",
            decay_csv(o.lengths, {{"reference", &r.reference.survival},
                                  {"interleaved", &r.interleaved.survival}}),
            std::move(info));
  return out;
}

Artifacts rb_purity(RunContext& c) {
  const NoiseRequest nr = NoiseRequest::read(c.params, true);
  PurityOptions po;
  po.rb = rb_options(c, 14, "rb-purity");
  po.tomography_shots = static_cast<int>(c.params.integer("tomography_shots", 0));
  if (po.tomography_shots < 0) throw ConfigError("tomography_shots: must be non-negative");
  po.readout = readout_from(c.params, 1.0, 1.0);
  c.params.reject_unused("rb-purity");
  Artifacts out;
  json info = {{"experiment", "rb-purity"}, {"tomography_shots", po.tomography_shots}};
  const NoiseModel noise = build_noise(nr, c, out, info);
  const PurityResult r = run_purity_rb(noise, po);
  info["fits"] = {{"purity", fit_json(r.fit, 2.0)}};
  info["gamma"] = r.gamma;
  info["purity_error"] = r.purity_error;
  info["title"] = "Purity benchmarking";
  info["ylabel"] = "Tr(rho^2)";
  add_decay(out, "rb_purity", decay_csv(r.lengths, {{"purity", &r.purity}}), std::move(info));
  return out;
}

Artifacts rb_leakage(RunContext& c) {
  const NoiseRequest nr = NoiseRequest::read(c.params, false);
  const double level2 = c.params.number("level2_signal", 0.0);
  const RBOptions o = rb_options(c, 20, "rb-leakage");
  c.params.reject_unused("rb-leakage");
  Artifacts out;
  json info = {{"experiment", "rb-leakage"}, {"level2_signal", level2}};
  NoiseModel noise = build_noise(nr, c, out, info);
  noise.level2_signal = level2;
  const LeakageResult r = run_leakage_rb(noise, o);
  info["mean_metric"] = r.mean_metric;
  info["asymptote"] = r.asymptote;
  info["title"] = "Leakage randomized benchmarking";
  info["ylabel"] = "leakage metric";
  add_decay(out, "rb_leakage", decay_csv(r.lengths, {{"metric", &r.metric}}), std::move(info));
  return out;
}


Artifacts state_tomo(RunContext& c) {
  const auto& t = c.params;
  const GateTarget target = parse_gate_target(t.text("target", "sqrt-iswap"));
  const double width = ns(t.number("width_ns", 183.0));
  const std::string input = t.text("input", "10");
  const int shots = static_cast<int>(t.integer("shots", 8000));
  const ReadoutModel ro = readout_from(t, 1.0, 1.0);
  const bool deco = flag(t, "decoherence", true);
  t.reject_unused("state-tomo");
  if (shots < 0) throw ConfigError("shots: must be non-negative");
  const std::uint64_t seed = shots > 0 ? require_seed(c, "state-tomo") : c.seed.value_or(0);
  const CMatrix rho_in = basis_projector(input);

  const Propagator prop(c.device.params, c.device.bias);
  Artifacts out;
  const CalibratedGate g = obtain_gate(c, out, prop, target, width);
  const PauliTransferMatrix ptm = build_gate_ptm(prop, g, decoherence(c, deco));
  const CMatrix rho = ptm.apply(rho_in);
  const CMatrix u = ideal_gate(target);
  const CMatrix ideal = u * rho_in * u.adjoint();
  Rng rng(seed);
  const StateTomographyResult st = state_tomography(rho, shots, ro, rng);
  const CMatrix norm = rho / rho.trace().real();
  out.summary = {{"experiment", "state-tomo"},
                 {"gate", gate_json(g)},
                 {"input", input},
                 {"shots", shots},
                 {"readout", {ro.fidelity[0], ro.fidelity[1]}},
                 {"fidelity_true_state", state_fidelity(norm, ideal)},
                 {"fidelity_linear", state_fidelity(project_to_physical(st.linear), ideal)},
                 {"fidelity_mle", state_fidelity(st.mle, ideal)}};
  out.add("state_tomo.json", out.summary.dump(2) + "\n");
  out.add("density.csv", density_csv(st.linear, st.mle));
  return out;
}

Artifacts process_tomo(RunContext& c) {
  const auto& t = c.params;
  const GateTarget target = parse_gate_target(t.text("target", "iswap"));
  const double width = ns(t.number("width_ns", 183.0));
  const int per_setting = positive_int(t, "shots_per_setting", 8000);
  const ReadoutModel ro = readout_from(t, 0.70, 0.73);
  const bool deco = flag(t, "decoherence", true);
  const int reps = positive_int(t, "repetitions", 1);
  t.reject_unused("process-tomo");
  const std::uint64_t seed = require_seed(c, "process-tomo");

  const Propagator prop(c.device.params, c.device.bias);
  Artifacts out;
  const CalibratedGate g = obtain_gate(c, out, prop, target, width);
  const PauliTransferMatrix ptm = build_gate_ptm(prop, g, decoherence(c, deco));
  const CMatrix ideal = ideal_gate(target);
  const OperatorChannel channel = [&](const CMatrix& r) { return ptm.apply(r); };
  json runs = json::array();
  double mean_mle = 0.0, mean_lin = 0.0;
  std::optional<ProcessTomographyResult> first;
  for (int k = 0; k < reps; ++k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    ProcessTomographyResult r = process_tomography(channel, ideal, 9 * per_setting, ro, rng);
    runs.push_back({{"average_fidelity_linear", r.average_fidelity_linear},
                    {"average_fidelity_mle", r.average_fidelity_mle},
                    {"process_fidelity_mle", r.process_fidelity_mle}});
    mean_mle += r.average_fidelity_mle / reps;
    mean_lin += r.average_fidelity_linear / reps;
    if (!first) first = std::move(r);
  }
  out.summary = {{"experiment", "process-tomo"},
                 {"gate", gate_json(g)},
                 {"shots_per_setting", per_setting},
                 {"readout", {ro.fidelity[0], ro.fidelity[1]}},
                 {"true_average_fidelity", average_gate_fidelity(ptm, ideal)},
                 {"mean_average_fidelity_mle", mean_mle},
                 {"mean_average_fidelity_linear", mean_lin},
                 {"runs", runs}};
  const std::string csv = ptm_csv(first->mle);
  out.add("process_tomo.json", out.summary.dump(2) + "\n");
  out.add("ptm_mle.csv", csv);
  out.add("ptm_linear.csv", ptm_csv(first->linear));
  out.add("ptm_mle.svg", plot_ptm(CsvTable::parse(csv, "ptm_mle.csv")));
  return out;
}

Artifacts bell(RunContext& c) {
  const auto& t = c.params;
  const double delta = t.number("delta", 0.155);
  const int shots = static_cast<int>(t.integer("shots", 0));
  const ReadoutModel ro = readout_from(t, 1.0, 1.0);
  const bool deco = flag(t, "decoherence", true);
  t.reject_unused("bell");
  if (shots < 0) throw ConfigError("shots: must be non-negative");
  const std::uint64_t seed = shots > 0 ? require_seed(c, "bell") : c.seed.value_or(0);

  const Propagator prop(c.device.params, c.device.bias);
  Artifacts out;
  const CalibratedGate g = obtain_gate(c, out, prop, GateTarget::kSqrtISwap, 0.0, delta);
  const PauliTransferMatrix ptm = build_gate_ptm(prop, g, decoherence(c, deco));
  const CMatrix rho = ptm.apply(basis_projector("10"));
  CVector target(4);
  target << 0.0, Complex(0.0, -1.0 / std::sqrt(2.0)), 1.0 / std::sqrt(2.0), 0.0;
  Rng rng(seed);
  const StateTomographyResult st = state_tomography(rho, shots, ro, rng);
  out.summary = {{"experiment", "bell"},
                 {"gate", gate_json(g)},
                 {"shots", shots},
                 {"trace", rho.trace().real()},
                 {"fidelity", state_fidelity(CMatrix(rho / rho.trace().real()), target)},
                 {"fidelity_unnormalized", state_fidelity(rho, target)},
                 {"fidelity_mle", state_fidelity(st.mle, target)}};
  out.add("bell.json", out.summary.dump(2) + "\n");
  out.add("density.csv", density_csv(st.linear, st.mle));
  return out;
}

using Runner = Artifacts (*)(RunContext&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"chevron", chevron},           {"ramsey-shift", ramsey},
      {"calibrate", calibrate},       {"gate-scan", gate_scan},
      {"rb-standard", rb_standard},   {"rb-interleaved", rb_interleaved},
      {"rb-purity", rb_purity},       {"rb-leakage", rb_leakage},
      {"state-tomo", state_tomo},     {"process-tomo", process_tomo},
      {"bell", bell}};
  return table;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = [] {
    std::vector<std::string> k;
    for (const auto& [name, fn] : runners()) k.push_back(name);
    return k;
  }();
  return kinds;
}

Artifacts run_experiment(const std::string& kind, RunContext& context) {
  const auto it = runners().find(kind);
  if (it == runners().end()) throw ConfigError("experiment: unknown kind '" + kind + "'");
  return it->second(context);
}

}  // namespace tbus::cli
