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

#include "tbus/calibration.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "tbus/errors.hpp"
#include "tbus/parallel.hpp"

namespace tbus {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMHz = 2.0 * kPi * 1e6;

double wrap_phase(double phi) {
  phi = std::remainder(phi, 2.0 * kPi);
  return phi <= -kPi ? phi + 2.0 * kPi : phi;
}

double max_delta(double theta, double margin) { return 0.5 - std::abs(theta) - margin; }

// Average gate fidelity of the (possibly leaky) Kraus block k against u.
double block_fidelity(const CMatrix& k, const CMatrix& u) {
  const double d = static_cast<double>(u.rows());
  const double overlap = std::norm((u.adjoint() * k).trace());
  const double retained = (k.adjoint() * k).trace().real();
  return (overlap + retained) / (d * (d + 1.0));
}

CMatrix apply_z(const CMatrix& block, double phi1, double phi2) {
  const std::array<Complex, 4> z{1.0, std::exp(kI * phi2), std::exp(kI * phi1),
                                 std::exp(kI * (phi1 + phi2))};
  CMatrix out = block;
  for (int a = 0; a < 4; ++a) out.row(a) *= z[a];
  return out;
}

}  // namespace

std::string to_string(GateTarget target) {
  return target == GateTarget::kISwap ? "iswap" : "sqrt-iswap";
}

GateTarget parse_gate_target(const std::string& name) {
  if (name == "iswap") return GateTarget::kISwap;
  if (name == "sqrt-iswap" || name == "sqrt_iswap") return GateTarget::kSqrtISwap;
  throw ConfigError("unknown gate target '" + name + "' (expected iswap or sqrt-iswap)");
}

double target_angle(GateTarget target) {
  return target == GateTarget::kISwap ? 0.5 * kPi : 0.25 * kPi;
}

CMatrix ideal_gate(GateTarget target) {
  const double a = target_angle(target);
  CMatrix u = CMatrix::Identity(4, 4);
  u(1, 1) = u(2, 2) = std::cos(a);
  u(1, 2) = u(2, 1) = -kI * std::sin(a);
  return u;
}

double transfer_overlap(const Propagator& propagator, const FluxPulse& pulse, GateTarget target) {
  const LabeledBasis& basis = propagator.basis();
  const int i01 = basis.index({0, 1, 0});
  const int i10 = basis.index({1, 0, 0});
  CMatrix in = CMatrix::Zero(propagator.dimension(), 2);
  in(i01, 0) = 1.0;
  in(i10, 1) = 1.0;
  const CMatrix out = propagator.evolve(pulse, in);
  // Row overlaps with the target block [[c, -is], [-is, c]]; a row phase is
  // a Z correction and drops out.
  const double c = std::cos(target_angle(target));
  const double s = std::sin(target_angle(target));
  const Complex js(0.0, s);
  const double row01 = std::norm(c * out(i01, 0) + js * out(i01, 1));
  const double row10 = std::norm(js * out(i10, 0) + c * out(i10, 1));
  return std::clamp(0.5 * (row01 + row10), 0.0, 1.0);
}

double envelope_area(const FluxPulse& pulse) {
  const double total = pulse.total_duration();
  if (total <= 0.0) return 0.0;
  constexpr int kIntervals = 4000;  // Simpson, even count
  const double h = total / kIntervals;
  double sum = envelope(pulse, 0.0) + envelope(pulse, total);
  for (int k = 1; k < kIntervals; ++k) sum += (k % 2 ? 4.0 : 2.0) * envelope(pulse, k * h);
  return sum * h / 3.0;
}

double seed_amplitude(const DeviceParams& params, const FluxPulse& shape, GateTarget target,
                      double flux_margin) {
  const double goal = target_angle(target);
  const double area = envelope_area(shape);
  if (!(area > 0.0)) throw ConfigError("calibration: pulse has no envelope area");
  auto rotation = [&](double d) {
    return std::abs(effective_model(params, shape.theta, d).harmonic_exchange_rate) * area;
  };
  const double top = max_delta(shape.theta, flux_margin);
  constexpr double kStep = 0.005;
  double prev = 0.0;
  double best = kStep;
  double best_rotation = 0.0;
  for (double d = kStep; d <= top; d += kStep) {
    const double r = rotation(d);
    if (!std::isfinite(r)) break;
    if (r > best_rotation) {
      best_rotation = r;
      best = d;
    }
    if (r >= goal) {
      double lo = prev;
      double hi = d;
      for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        (rotation(mid) >= goal ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = d;
  }
  return best;
}

AmplitudeFrequency refine_amplitude_frequency(const Propagator& propagator, double width,
                                              GateTarget target, double delta, double omega_phi,
                                              const CalibrationOptions& options) {
  FluxPulse shape;
  shape.theta = propagator.basis().theta();
  shape.edge_sigma = options.edge_sigma;
  shape.edge_extent = options.edge_extent;
  shape = shape.with_total_width(width);
  const double top = max_delta(shape.theta, options.flux_margin);
  if (!(delta > 0.0)) throw ConfigError("calibration: starting amplitude must be positive");

  AmplitudeFrequency out;
  out.seed_delta = delta;
  out.seed_omega = omega_phi;
  bool clipped = false;
  auto pulse_at = [&](const RVector& x) {
    FluxPulse p = shape;
    p.omega_phi = omega_phi + kMHz * x[0];
    p.delta = delta * (1.0 + 0.01 * x[1]);
    if (p.delta > top) {
      p.delta = top;
      clipped = true;
    }
    p.delta = std::max(p.delta, 0.0);
    return p;
  };
  RVector step(2);
  step << 1.0, 2.0;
  const NelderMeadResult nm = nelder_mead(
      [&](const RVector& x) { return 1.0 - transfer_overlap(propagator, pulse_at(x), target); },
      RVector::Zero(2), step, options.refine);
  const FluxPulse best = pulse_at(nm.x);
  out.delta = best.delta;
  out.omega_phi = best.omega_phi;
  out.overlap = 1.0 - nm.value;
  out.evaluations = nm.evaluations;
  out.clipped = clipped && best.delta >= top;
  out.below_threshold = out.overlap < options.overlap_threshold;
  return out;
}

AmplitudeFrequency calibrate_amplitude_frequency(const Propagator& propagator, double width,
                                                 GateTarget target,
                                                 const CalibrationOptions& options) {
  if (options.grid_points < 2) throw ConfigError("calibration: grid needs at least 2 points");
  FluxPulse shape;
  shape.theta = propagator.basis().theta();
  shape.edge_sigma = options.edge_sigma;
  shape.edge_extent = options.edge_extent;
  shape = shape.with_total_width(width);

  const DeviceParams& params = propagator.params();
  const double top = max_delta(shape.theta, options.flux_margin);
  const double delta0 = seed_amplitude(params, shape, target, options.flux_margin);
  const double omega0 = effective_model(params, shape.theta, delta0).detuning;

  const int n = options.grid_points;
  std::vector<double> overlaps(static_cast<std::size_t>(n * n));
  std::vector<FluxPulse> grid(overlaps.size(), shape);
  bool clipped = false;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      FluxPulse& p = grid[static_cast<std::size_t>(i * n + j)];
      const double u = 2.0 * i / (n - 1) - 1.0;
      const double v = 2.0 * j / (n - 1) - 1.0;
      p.omega_phi = omega0 + options.omega_span * u;
      p.delta = delta0 * (1.0 + options.delta_span * v);
      if (p.delta > top) {
        p.delta = top;
        clipped = true;
      }
    }
  parallel_for(grid.size(), [&](std::size_t k) {
    overlaps[k] = transfer_overlap(propagator, grid[k], target);
  });
  const auto best = static_cast<std::size_t>(
      std::max_element(overlaps.begin(), overlaps.end()) - overlaps.begin());

  AmplitudeFrequency out = refine_amplitude_frequency(propagator, width, target, grid[best].delta,
                                                      grid[best].omega_phi, options);
  if (overlaps[best] > out.overlap) {
    out.delta = grid[best].delta;
    out.omega_phi = grid[best].omega_phi;
    out.overlap = overlaps[best];
    out.below_threshold = out.overlap < options.overlap_threshold;
  }
  out.seed_delta = delta0;
  out.seed_omega = omega0;
  out.clipped = out.clipped || (clipped && out.delta >= top);
  out.evaluations += static_cast<int>(grid.size());
  return out;
}

std::array<double, 2> calibrate_phases(const CMatrix& block, GateTarget target) {
  if (block.rows() != 4 || block.cols() != 4)
    throw ConfigError("calibrate_phases: expected a 4x4 computational block");
  const double a = target_angle(target);
  const double t12 = std::abs(block(1, 2));
  const double t21 = std::abs(block(2, 1));
  const double needed = 0.1 * std::sin(a);
  if (t12 < needed || t21 < needed || std::abs(block(0, 0)) < 0.1)
    throw NumericalError("calibration",
                         "transfer amplitude too small to define the Z phases (overlap " +
                             std::to_string(t12 * t12) + ")");
  const double global = std::arg(block(0, 0));
  // Target exchange element is -i sin(a): arg = -pi/2.
  RVector x0(2);
  x0 << global - 0.5 * kPi - std::arg(block(2, 1)), global - 0.5 * kPi - std::arg(block(1, 2));
  const CMatrix ideal = ideal_gate(target);
  RVector step(2);
  step << 0.05, 0.05;
  const NelderMeadResult nm = nelder_mead(
      [&](const RVector& x) { return 1.0 - block_fidelity(apply_z(block, x[0], x[1]), ideal); },
      x0, step, NelderMeadOptions{200, 1e-10, 1e-15});
  return {wrap_phase(nm.x[0]), wrap_phase(nm.x[1])};
}

std::array<double, 2> calibrate_phases(const Propagator& propagator, const FluxPulse& pulse,
                                       GateTarget target) {
  return calibrate_phases(computational_block(propagator, pulse), target);
}

CalibratedGate calibrate_gate(const Propagator& propagator, double width, GateTarget target,
                              const CalibrationOptions& options) {
  const AmplitudeFrequency af = calibrate_amplitude_frequency(propagator, width, target, options);
  CalibratedGate gate;
  gate.target = target;
  gate.pulse.theta = propagator.basis().theta();
  gate.pulse.edge_sigma = options.edge_sigma;
  gate.pulse.edge_extent = options.edge_extent;
  gate.pulse = gate.pulse.with_total_width(width);
  gate.pulse.delta = af.delta;
  gate.pulse.omega_phi = af.omega_phi;
  const CMatrix block = computational_block(propagator, gate.pulse);
  gate.z_phases = calibrate_phases(block, target);
  gate.achieved_overlap = af.overlap;
  gate.achieved_fidelity =
      block_fidelity(apply_z(block, gate.z_phases[0], gate.z_phases[1]), ideal_gate(target));
  gate.below_threshold = af.below_threshold;
  return gate;
}

CalibratedGate calibrate_gate_at_amplitude(const Propagator& propagator, double delta,
                                           GateTarget target, const CalibrationOptions& options) {
  FluxPulse shape;
  shape.theta = propagator.basis().theta();
  shape.edge_sigma = options.edge_sigma;
  shape.edge_extent = options.edge_extent;
  shape.delta = delta;
  shape.validate();
  if (!(delta > 0.0)) throw ConfigError("calibration: amplitude must be positive");
  const DeviceParams& params = propagator.params();
  const EffectiveModel em = effective_model(params, shape.theta, delta);
  const double rate = std::abs(em.harmonic_exchange_rate);
  if (!std::isfinite(rate) || rate == 0.0)
    throw NumericalError("calibration", "no exchange rate at this amplitude");
  // Edges contribute their envelope area; the flat part supplies the rest.
  const double edge_area = 0.5 * envelope_area(shape);
  const double flat0 = std::max(0.0, target_angle(target) / rate - 2.0 * edge_area);
  const double omega0 = em.detuning;
  constexpr double kNs = 1e-9;
  auto pulse_at = [&](const RVector& x) {
    FluxPulse p = shape;
    p.flat_duration = std::max(0.0, flat0 + kNs * x[1]);
    p.omega_phi = omega0 + kMHz * x[0];
    return p;
  };
  RVector step(2);
  step << 1.0, 2.0;
  // Populations alone do not separate the resonant solution from detuned
  // ones once the width is free, so this search scores the phase-corrected
  // coherent gate fidelity.
  const CMatrix ideal = ideal_gate(target);
  const NelderMeadResult nm = nelder_mead(
      [&](const RVector& x) {
        const CMatrix block = computational_block(propagator, pulse_at(x));
        try {
          const auto phi = calibrate_phases(block, target);
          return 1.0 - block_fidelity(apply_z(block, phi[0], phi[1]), ideal);
        } catch (const NumericalError&) {
          return 1.0;
        }
      },
      RVector::Zero(2), step, options.refine);
  CalibratedGate gate;
  gate.target = target;
  gate.pulse = pulse_at(nm.x);
  gate.achieved_overlap = transfer_overlap(propagator, gate.pulse, target);
  gate.below_threshold = gate.achieved_overlap < options.overlap_threshold;
  const CMatrix block = computational_block(propagator, gate.pulse);
  gate.z_phases = calibrate_phases(block, target);
  gate.achieved_fidelity =
      block_fidelity(apply_z(block, gate.z_phases[0], gate.z_phases[1]), ideal_gate(target));
  return gate;
}

PauliTransferMatrix build_gate_ptm(const Propagator& propagator, const CalibratedGate& gate,
                                   const std::optional<LindbladSpec>& lindblad) {
  return computational_ptm(propagator, gate.pulse, lindblad, gate.z_phases[0], gate.z_phases[1]);
}

std::string config_hash(const DeviceParams& p) {
  char buf[64];
  std::string text;
  auto add = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g;", v);
    text += buf;
  };
  for (int q = 0; q < 2; ++q) {
    add(p.omega_q[q]);
    add(p.alpha_q[q]);
    add(p.g_q[q]);
    add(p.t1[q]);
    add(p.t2[q]);
  }
  add(p.omega_tb0);
  add(p.alpha_tb);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_calibrations(const std::filesystem::path& path, const std::vector<CalibratedGate>& gates,
                       const DeviceParams& params) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["config_hash"] = config_hash(params);
  doc["gates"] = nlohmann::json::array();
  for (const auto& g : gates) {
    doc["gates"].push_back({{"gate", to_string(g.target)},
                            {"width_s", g.pulse.total_duration()},
                            {"theta", g.pulse.theta},
                            {"delta", g.pulse.delta},
                            {"omega_phi_rad_s", g.pulse.omega_phi},
                            {"carrier_phase", g.pulse.phase},
                            {"edge_sigma_s", g.pulse.edge_sigma},
                            {"edge_extent", g.pulse.edge_extent},
                            {"phi1", g.z_phases[0]},
                            {"phi2", g.z_phases[1]},
                            {"overlap", g.achieved_overlap},
                            {"fidelity", g.achieved_fidelity},
                            {"below_threshold", g.below_threshold}});
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write calibration file " + path.string());
  out << doc.dump(2) << '\n';
}

std::vector<CalibratedGate> load_calibrations(const std::filesystem::path& path,
                                              const DeviceParams& params) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read calibration file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
    if (doc.at("schema_version").get<int>() != 1)
      throw ConfigError("calibration file: unsupported schema_version");
    if (doc.at("config_hash").get<std::string>() != config_hash(params))
      throw ConfigError("calibration file: config_hash does not match the device");
    std::vector<CalibratedGate> gates;
    for (const auto& j : doc.at("gates")) {
      CalibratedGate g;
      g.target = parse_gate_target(j.at("gate").get<std::string>());
      g.pulse.theta = j.at("theta").get<double>();
      g.pulse.edge_sigma = j.at("edge_sigma_s").get<double>();
      g.pulse.edge_extent = j.at("edge_extent").get<double>();
      g.pulse = g.pulse.with_total_width(j.at("width_s").get<double>());
      g.pulse.delta = j.at("delta").get<double>();
      g.pulse.omega_phi = j.at("omega_phi_rad_s").get<double>();
      g.pulse.phase = j.at("carrier_phase").get<double>();
      g.z_phases = {j.at("phi1").get<double>(), j.at("phi2").get<double>()};
      g.achieved_overlap = j.at("overlap").get<double>();
      g.achieved_fidelity = j.at("fidelity").get<double>();
      g.below_threshold = j.at("below_threshold").get<bool>();
      g.pulse.validate();
      gates.push_back(g);
    }
    return gates;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("calibration file " + path.string() + ": " + e.what());
  }
}

std::vector<WidthScanPoint> gate_error_vs_width(const Propagator& propagator,
                                                const std::vector<double>& widths,
                                                const std::optional<LindbladSpec>& lindblad,
                                                GateTarget target,
                                                const CalibrationOptions& options) {
  std::vector<WidthScanPoint> points(widths.size());
  const CMatrix ideal = ideal_gate(target);
  parallel_for(widths.size(), [&](std::size_t i) {
    WidthScanPoint& pt = points[i];
    pt.width = widths[i];
    try {
      pt.gate = calibrate_gate(propagator, widths[i], target, options);
      const PauliTransferMatrix ptm = build_gate_ptm(propagator, pt.gate, lindblad);
      pt.error = 1.0 - average_gate_fidelity(ptm, ideal);
      pt.leakage = std::max(0.0, 1.0 - ptm.trace_retention());
      pt.coherent_error = 1.0 - pt.gate.achieved_fidelity;
      pt.ok = true;
    } catch (const ConfigError& e) {
      pt.failure = e.what();
    } catch (const NumericalError& e) {
      pt.failure = e.what();
    }
  });
  return points;
}

}  // namespace tbus
