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

// Time evolution of the three-mode device under a flux drive.
//
// States are expressed in the measurement basis of the static bias and in the
// frame rotating with its eigen-energies (the interaction frame). Internally
// the integrator works in the lab frame, where the drive only multiplies the
// bus number operator, and converts back at the end of every pulse.

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "tbus/device.hpp"
#include "tbus/hamiltonian.hpp"
#include "tbus/pauli.hpp"
#include "tbus/pulses.hpp"

namespace tbus {

struct LindbladSpec {
  std::array<double, 2> relaxation{};  // Gamma_minus = 1/T1, 1/s
  std::array<double, 2> dephasing{};   // Gamma_phi = 1/T2 - 1/(2 T1), 1/s

  static LindbladSpec from_device(const DeviceParams& params);
  void validate() const;
  bool is_zero() const;
};

struct StepOptions {
  /// Fixed time step in seconds; 0 selects 1/(steps_per_period * f_phi).
  double dt = 0.0;
  double steps_per_period = 100.0;
  /// Compare against a halved step on the first propagation.
  bool validate = true;
  double validation_tolerance = 1e-6;
  /// Length of the unitary segments between dissipative sub-steps.
  double dissipation_step = 0.5e-9;
  double idle_dissipation_step = 5e-9;  // used when the drive is off
};

struct PropagationResult {
  std::optional<CVector> state;    // pure-state runs
  std::optional<CMatrix> density;  // master-equation runs
  std::vector<double> times;
  // Populations of |00>, |01>, |10>, |11> (measurement labels) at `times`.
  std::vector<std::array<double, 4>> populations;
  std::vector<double> leakage_trace;
  double leakage = 0.0;  // 1 - computational population at the end
};

/// Integrator bound to one device and one static bias. Cheap to share across
/// threads; the step validation runs once per instance.
class Propagator {
 public:
  Propagator(DeviceParams params, LabeledBasis basis, StepOptions options = {});
  Propagator(const DeviceParams& params, double theta, StepOptions options = {});

  const DeviceParams& params() const noexcept { return params_; }
  const LabeledBasis& basis() const noexcept { return basis_; }
  const StepOptions& options() const noexcept { return options_; }
  int dimension() const noexcept { return basis_.dimension(); }

  /// Step used for `pulse`, after rounding to an integer number of steps.
  double time_step(const FluxPulse& pulse) const;

  /// Evolves the columns of `initial` (interaction frame at t = 0) to the
  /// end of the pulse (interaction frame at t = T).
  CMatrix evolve(const FluxPulse& pulse, const CMatrix& initial) const;
  CVector evolve(const FluxPulse& pulse, const CVector& initial) const;

  /// Full interaction-frame propagator over the pulse.
  CMatrix unitary(const FluxPulse& pulse) const;

  /// Lab-frame unitaries of consecutive segments of about `segment` seconds.
  /// Diagonal segments (no drive) are flagged so callers can skip products.
  struct Segment {
    double duration = 0.0;
    bool diagonal = false;
    CMatrix unitary;  // empty when diagonal
  };
  std::vector<Segment> segments(const FluxPulse& pulse, double segment) const;

  /// e^{-i D t} as a vector of phases.
  CVector free_phases(double t) const;

 private:
  struct Validation;

  void ensure_validated(const FluxPulse& pulse, const CMatrix& probe) const;
  double raw_step(const FluxPulse& pulse) const;
  // Lab-frame propagation of columns stored as [Re | Im] over fine steps
  // [k_begin, k_end) of length dt.
  void advance(const FluxPulse& pulse, double dt, long k_begin, long k_end, RMatrix& x) const;
  CMatrix evolve_with_step(const FluxPulse& pulse, const CMatrix& initial, double dt) const;

  DeviceParams params_;
  LabeledBasis basis_;
  StepOptions options_;
  RMatrix v_;            // measurement -> bare (real orthogonal)
  RMatrix vt_;
  RVector energies_;     // relative to the ground state
  std::vector<int> bus_occupation_;  // bare bus number per bare index
  double omega_tb_static_;
  std::shared_ptr<Validation> validation_;
};

PropagationResult propagate_unitary(const Propagator& propagator, const FluxPulse& pulse,
                                    const CVector& initial, double sample_interval = 0.0);

PropagationResult propagate_lindblad(const Propagator& propagator, const FluxPulse& pulse,
                                     const LindbladSpec& lindblad, const DensityState& initial,
                                     double sample_interval = 0.0);

/// Linear map on 27x27 operators (interaction frame) implementing the
/// master-equation evolution over one pulse. Works on non-Hermitian inputs too.
CMatrix evolve_operator(const Propagator& propagator, const FluxPulse& pulse,
                        const LindbladSpec& lindblad, const CMatrix& rho);

/// One pulse followed by Z corrections as a reusable map on 27x27
/// interaction-frame operators. Segment unitaries are computed once, so
/// repeated applications (RB sequences) only pay for the products.
class PulseProcess {
 public:
  PulseProcess(const Propagator& propagator, const FluxPulse& pulse,
               std::optional<LindbladSpec> lindblad, double phi1 = 0.0, double phi2 = 0.0);
  ~PulseProcess();
  PulseProcess(PulseProcess&&) noexcept;
  PulseProcess& operator=(PulseProcess&&) noexcept;

  CMatrix apply(const CMatrix& rho) const;
  const LabeledBasis& basis() const noexcept;
  bool is_unitary() const noexcept;
  /// Interaction-frame unitary including Z corrections (unitary processes only).
  const CMatrix& unitary() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Unitary Z(phi1) (x) Z(phi2) on the labeled states, phase e^{i(phi1 n1 + phi2 n2)}.
CVector z_correction(const LabeledBasis& basis, double phi1, double phi2);

/// Two-qubit computational-subspace channel of a pulse followed by the Z
/// corrections, as a PTM on the 4-dimensional subspace. Leakage shows up as
/// trace loss (R_00 < 1).
PauliTransferMatrix computational_ptm(const Propagator& propagator, const FluxPulse& pulse,
                                      const std::optional<LindbladSpec>& lindblad,
                                      double phi1 = 0.0, double phi2 = 0.0);

/// 4x4 block of the interaction-frame propagator on |00>, |01>, |10>, |11>.
CMatrix computational_block(const Propagator& propagator, const FluxPulse& pulse,
                            double phi1 = 0.0, double phi2 = 0.0);

enum class LeakageConvention { kTraceLoss, kRenormalized };

struct FidelityOptions {
  LeakageConvention convention = LeakageConvention::kTraceLoss;
  bool allow_trace_loss = true;
  double trace_tolerance = 1e-6;
};

/// F = (d F_pro + Tr E(I)/d) / (d + 1), reducing to (d F_pro + 1)/(d + 1)
/// for trace-preserving channels.
double average_gate_fidelity(const PauliTransferMatrix& channel, const CMatrix& ideal,
                             const FidelityOptions& options = {});
double average_gate_fidelity(const OperatorChannel& channel, const CMatrix& ideal,
                             const FidelityOptions& options = {});

struct ChevronMap {
  std::vector<double> omegas;     // rad/s
  std::vector<double> durations;  // total pulse widths, s
  RMatrix transfer;               // rows: omegas, cols: durations; P(|10>) from |01>
  std::vector<double> mean_transfer;
  std::vector<double> contrast;
  double resonance = 0.0;         // rad/s, Lorentzian centre of mean_transfer
  double resonance_width = 0.0;   // rad/s, half width
};

ChevronMap chevron_scan(const Propagator& propagator, const FluxPulse& pulse_template,
                        const std::vector<double>& omegas, const std::vector<double>& durations);

struct RamseyResult {
  double shift = 0.0;  // rad/s
  double shift_uncertainty = 0.0;
  std::vector<double> flat_durations;
  std::vector<double> phases;  // unwrapped accumulated phase
  std::vector<double> excited_population;  // final P(qubit = 1), X-quadrature
};

/// Ramsey sequence pi/2 - exchange(t) - phase-reversed exchange(t) - pi/2 on
/// one qubit (0 or 1) with the other in its ground state. The pulse's flat
/// duration is replaced by each entry of `flat_durations`.
RamseyResult ramsey_shift(const Propagator& propagator, const FluxPulse& pulse, int qubit,
                          const std::vector<double>& flat_durations);
RamseyResult ramsey_shift(const Propagator& propagator, const FluxPulse& pulse, int qubit);

}  // namespace tbus
