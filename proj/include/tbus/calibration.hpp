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

// Numerical calibration of the parametric exchange gate at a fixed width:
// carrier frequency and amplitude from the population overlap, then the two
// single-qubit Z corrections from the propagator's phases.

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tbus/dynamics.hpp"
#include "tbus/optimize.hpp"

namespace tbus {

enum class GateTarget { kISwap, kSqrtISwap };

std::string to_string(GateTarget target);
GateTarget parse_gate_target(const std::string& name);

/// exp(-i theta (XX + YY)/2) with theta = pi/2 (iSWAP) or pi/4 (sqrt-iSWAP),
/// in the order |00>, |01>, |10>, |11>. Off-diagonal exchange terms are -i sin.
CMatrix ideal_gate(GateTarget target);

/// Rotation angle of the target in the single-excitation subspace.
double target_angle(GateTarget target);

struct CalibrationOptions {
  int grid_points = 7;
  double omega_span = 2.0 * 3.14159265358979323846 * 6e6;  // +/- around the seed, rad/s
  double delta_span = 0.2;                                  // relative, +/-
  double overlap_threshold = 0.99;
  double edge_sigma = 8.3e-9;
  double edge_extent = 3.0;
  double flux_margin = 5e-3;  // keep |theta| + delta this far below 1/2
  NelderMeadOptions refine{160, 1e-5, 1e-9};
};

struct AmplitudeFrequency {
  double delta = 0.0;
  double omega_phi = 0.0;
  double overlap = 0.0;
  double seed_delta = 0.0;
  double seed_omega = 0.0;
  bool below_threshold = false;
  bool clipped = false;
  int evaluations = 0;
};

/// Mean overlap of the simulated |01>, |10> rows with the target's rows,
/// each maximized over a row phase (a Z correction). For iSWAP this is the
/// transfer population; for partial swaps it also rejects detuned rotations
/// with the right populations.
double transfer_overlap(const Propagator& propagator, const FluxPulse& pulse, GateTarget target);

/// Amplitude solving Omega_h(delta) * t_eff = theta, where Omega_h is the
/// large-amplitude exchange rate and t_eff the envelope area.
double seed_amplitude(const DeviceParams& params, const FluxPulse& shape, GateTarget target,
                      double flux_margin = 5e-3);

/// Integral of the envelope over the pulse.
double envelope_area(const FluxPulse& pulse);

AmplitudeFrequency calibrate_amplitude_frequency(const Propagator& propagator, double width,
                                                 GateTarget target,
                                                 const CalibrationOptions& options = {});

/// Nelder-Mead refinement of (delta, omega_phi) from an explicit start.
AmplitudeFrequency refine_amplitude_frequency(const Propagator& propagator, double width,
                                              GateTarget target, double delta, double omega_phi,
                                              const CalibrationOptions& options = {});

/// Z phases making Z(phi1) (x) Z(phi2) * U closest to the target, from a
/// 4x4 computational block. Phases are wrapped to (-pi, pi].
std::array<double, 2> calibrate_phases(const CMatrix& block, GateTarget target);
std::array<double, 2> calibrate_phases(const Propagator& propagator, const FluxPulse& pulse,
                                       GateTarget target);

struct CalibratedGate {
  FluxPulse pulse;
  std::array<double, 2> z_phases{};
  GateTarget target = GateTarget::kISwap;
  double achieved_overlap = 0.0;
  double achieved_fidelity = 0.0;  // decoherence-free average gate fidelity
  bool below_threshold = false;
};

CalibratedGate calibrate_gate(const Propagator& propagator, double width, GateTarget target,
                              const CalibrationOptions& options = {});

/// Calibration at a fixed modulation amplitude: the pulse width and carrier
/// frequency are tuned instead (the first crossing of the target angle).
CalibratedGate calibrate_gate_at_amplitude(const Propagator& propagator, double delta,
                                           GateTarget target,
                                           const CalibrationOptions& options = {});

/// PTM of the calibrated gate on the computational subspace, including the
/// Z corrections; with decoherence when `lindblad` is given.
PauliTransferMatrix build_gate_ptm(const Propagator& propagator, const CalibratedGate& gate,
                                   const std::optional<LindbladSpec>& lindblad = std::nullopt);

/// Stable fingerprint of the device parameters used to key calibrations.
std::string config_hash(const DeviceParams& params);

void save_calibrations(const std::filesystem::path& path, const std::vector<CalibratedGate>& gates,
                       const DeviceParams& params);
/// Loads gates saved for `params`; throws ConfigError on a hash mismatch.
std::vector<CalibratedGate> load_calibrations(const std::filesystem::path& path,
                                              const DeviceParams& params);

struct WidthScanPoint {
  double width = 0.0;
  bool ok = false;
  std::string failure;
  double error = 0.0;    // 1 - average gate fidelity
  double leakage = 0.0;  // averaged over the four computational inputs
  double coherent_error = 0.0;
  CalibratedGate gate;
};

/// Calibrates the gate at every width independently and evaluates it with
/// decoherence. A failed calibration marks that width and the scan goes on.
std::vector<WidthScanPoint> gate_error_vs_width(const Propagator& propagator,
                                                const std::vector<double>& widths,
                                                const std::optional<LindbladSpec>& lindblad,
                                                GateTarget target = GateTarget::kISwap,
                                                const CalibrationOptions& options = {});

}  // namespace tbus
