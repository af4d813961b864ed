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

// Two-qubit state and process tomography from simulated Pauli-basis
// measurements with finite shots and imperfect readout.

#include <array>
#include <vector>

#include "tbus/pauli.hpp"
#include "tbus/random.hpp"

namespace tbus {

/// Per-qubit symmetric assignment fidelity P(read b | prepared b).
struct ReadoutModel {
  std::array<double, 2> fidelity{1.0, 1.0};
  void validate() const;
  /// 4x4 confusion matrix M with p_measured = M p_true (outcomes 00..11).
  RMatrix confusion() const;
};

/// Pauli setting per qubit: 1 = X, 2 = Y, 3 = Z.
struct MeasurementRecord {
  std::array<int, 2> setting{3, 3};
  int shots = 0;
  std::array<int, 4> counts{};  // outcomes 00, 01, 10, 11 (first digit Q1)
  ReadoutModel readout;
};

/// Outcome probabilities of `rho` in a setting, before readout error.
std::array<double, 4> setting_probabilities(const CMatrix& rho, std::array<int, 2> setting);

/// Samples the nine settings (X, Y, Z)^2 with `total_shots` split evenly.
std::vector<MeasurementRecord> simulate_measurements(const CMatrix& rho, int total_shots,
                                                     const ReadoutModel& readout, Rng& rng);

/// Readout-corrected Pauli expectation vector (v_0 = 1) from records.
RVector pauli_expectations(const std::vector<MeasurementRecord>& records);

/// Nearest unit-trace positive semidefinite matrix in the eigenvalue sense
/// (eigenvalue truncation with uniform redistribution).
CMatrix project_to_physical(const CMatrix& estimate);

struct StateTomographyResult {
  CMatrix linear;  // (1/4) sum <P> P
  CMatrix mle;
  RVector pauli;
  std::vector<MeasurementRecord> records;
};

/// `shots` = 0 gives the infinite-shot limit (exact expectations).
StateTomographyResult state_tomography(const CMatrix& rho, int shots, const ReadoutModel& readout,
                                       Rng& rng);

double state_fidelity(const CMatrix& rho, const CVector& psi);
/// (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double state_fidelity(const CMatrix& rho, const CMatrix& sigma);

/// The 16 product inputs built from {|0>, |1>, |+>, |+i>} per qubit.
std::vector<CMatrix> process_tomography_inputs();

struct ProcessTomographyResult {
  PauliTransferMatrix linear;
  PauliTransferMatrix mle;
  double process_fidelity_linear = 0.0;
  double process_fidelity_mle = 0.0;
  double average_fidelity_linear = 0.0;
  double average_fidelity_mle = 0.0;
};

/// Tomography of every output state, then R = B A^{-1} with A, B the input
/// and output Pauli vectors. `shots` per input state.
ProcessTomographyResult process_tomography(const OperatorChannel& channel, const CMatrix& ideal,
                                           int shots, const ReadoutModel& readout, Rng& rng);

}  // namespace tbus
