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

// Closed-form dispersive model of two fixed-frequency transmons coupled to a
// flux-tunable bus. All frequencies are angular (rad/s); flux is in units of
// the flux quantum.

#include <array>
#include <utility>
#include <vector>

namespace tbus {

struct DeviceParams {
  std::array<double, 2> omega_q{};  // bare qubit frequencies
  std::array<double, 2> alpha_q{};  // anharmonicities (negative for transmons)
  std::array<double, 2> g_q{};      // qubit-bus couplings
  double omega_tb0 = 0.0;           // bus frequency at zero flux
  double alpha_tb = 0.0;            // bus anharmonicity
  std::array<double, 2> t1{};       // seconds
  std::array<double, 2> t2{};       // seconds

  /// Structural checks (positivity, T2 <= 2 T1). Throws ConfigError.
  void validate() const;

  /// Also checks the dispersive guard |g_i / Delta_i(theta)| < 0.25.
  void validate_at(double theta) const;

  /// Parameters of the two-qubit tunable-bus device used throughout the
  /// examples and acceptance tests. The bus anharmonicity is not a measured
  /// value; it defaults to -300 MHz.
  static DeviceParams reference_device();
};

inline constexpr double kDispersiveGuard = 0.25;
inline constexpr double kReferenceBias = -0.108;

double bus_frequency(const DeviceParams& p, double flux);

/// Delta_i = omega_i - omega_TB(flux).
double qubit_bus_detuning(const DeviceParams& p, int qubit, double flux);

/// omega_i + g_i^2 / Delta_i. Throws NumericalError at resonance.
double dressed_frequency(const DeviceParams& p, int qubit, double flux);

/// (g_1 g_2 / 2)(1/Delta_1 + 1/Delta_2).
double exchange_coupling(const DeviceParams& p, double flux);

enum class FluxQuantity { kDressedFrequency1, kDressedFrequency2, kExchangeCoupling };

/// First or second flux derivative by Richardson-extrapolated central
/// differences. Rejects flux = 0 and points whose stencil would touch the
/// half-flux-quantum cusp.
double flux_derivative(const DeviceParams& p, double flux, FluxQuantity quantity,
                       int order);

/// Drive-averaged frequency shift of each dressed qubit for a modulation
/// Theta + delta cos(w t): (delta^2 / 4) d^2 omega_i / d Phi^2.
std::array<double, 2> drive_induced_shift(const DeviceParams& p, double flux,
                                          double delta);

/// Static ZZ rate E_11 - E_10 - E_01 + E_00 from the three-level spectrum.
double static_zz(const DeviceParams& p, double flux);

struct SpectroscopyData {
  std::vector<std::pair<double, double>> bus;     // (flux, omega_TB)
  std::vector<std::pair<double, double>> qubit1;  // (flux, dressed omega_1)
  std::vector<std::pair<double, double>> qubit2;
};

struct DeviceFit {
  DeviceParams params;  // only frequencies and couplings are fitted
  // One-sigma uncertainties, rad/s, order: omega_1, omega_2, g_1, g_2, omega_TB0.
  std::array<double, 5> uncertainty{};
  double residual_rms = 0.0;  // rad/s
  int iterations = 0;
};

/// Joint least-squares fit of the bus tuning curve and both dressed qubit
/// curves. Non-fitted fields are copied from `defaults`.
DeviceFit fit_device_params(const SpectroscopyData& data,
                            const DeviceParams& defaults = DeviceParams::reference_device());

}  // namespace tbus
