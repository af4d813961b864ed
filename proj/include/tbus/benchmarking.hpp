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

// Randomized benchmarking over two-qubit Clifford sequences: standard,
// interleaved, purity and leakage variants, and the shared decay fitter.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "tbus/cliffords.hpp"
#include "tbus/dynamics.hpp"
#include "tbus/pauli.hpp"
#include "tbus/tomography.hpp"

namespace tbus {

enum class NoiseMode { kPtmComposition, kTimeDomain };

/// How a Clifford sequence is realized. Single-qubit layers are ideal; each
/// iSWAP in a Clifford's decomposition uses the primitive below, optionally
/// followed by a channel applied after every whole Clifford.
struct NoiseModel {
  NoiseMode mode = NoiseMode::kPtmComposition;
  std::optional<PauliTransferMatrix> iswap;           // ideal when empty
  std::optional<PauliTransferMatrix> clifford_noise;  // after every Clifford
  std::shared_ptr<const PulseProcess> process;        // time-domain iSWAP
  double level2_signal = 0.0;  // readout signal of a transmon in |2>

  static NoiseModel ideal();
  /// Depolarizing channel after every Clifford with error r per Clifford.
  static NoiseModel depolarizing(double error_per_clifford);
  static NoiseModel from_gate(PauliTransferMatrix iswap_ptm);
  static NoiseModel time_domain(std::shared_ptr<const PulseProcess> process);

  void validate() const;
};

struct DecayFit {
  double a = 0.0;
  double alpha = 1.0;
  double b = 0.0;
  std::array<double, 3> standard_error{};  // a, alpha, b
  bool degenerate = false;
  int iterations = 0;
};

/// y = A alpha^m + B with alpha in (0, 1] and B in [0, 1]. Needs three
/// distinct m. Constant data is flagged degenerate: alpha = 0 if it sits at
/// `mixed_level` (already fully randomized), else alpha = 1.
DecayFit fit_decay(const std::vector<std::pair<double, double>>& points,
                   std::optional<double> mixed_level = std::nullopt);

struct RBOptions {
  std::vector<int> lengths{1, 2, 4, 8, 16, 24, 32, 48};
  int seeds = 20;
  std::uint64_t master_seed = 1;
  void validate() const;
};

struct RBResult {
  std::vector<int> lengths;
  // [length][seed]: joint |00> population and per-qubit ground populations.
  std::vector<std::vector<double>> survival;
  std::array<std::vector<std::vector<double>>, 2> qubit_survival;
  DecayFit fit;
  std::array<DecayFit, 2> qubit_fits;
  double error_per_clifford = 0.0;
  double error_per_clifford_stderr = 0.0;
  std::array<double, 2> qubit_error_per_clifford{};
  double iswaps_per_clifford = 1.5;
  double error_per_gate = 0.0;
};

/// Error per Clifford (d - 1)/d (1 - alpha), d = 4.
double error_per_clifford(double alpha);

RBResult run_standard_rb(const NoiseModel& noise, const RBOptions& options = {});

struct InterleavedGate {
  int element = 0;                             // index into the two-qubit group
  std::optional<PauliTransferMatrix> channel;  // overrides the noise model's realization
};

struct InterleavedResult {
  RBResult reference;
  RBResult interleaved;
  double gate_error = 0.0;
  double gate_error_stderr = 0.0;
  double lower_bound = 0.0;  // systematic bounds of the ratio estimate
  double upper_bound = 0.0;
  bool unphysical = false;   // interleaved decay slower than reference
};

InterleavedResult run_interleaved_rb(const NoiseModel& noise, const InterleavedGate& gate,
                                     const RBOptions& options = {},
                                     const std::optional<RBResult>& reference = std::nullopt);

struct PurityOptions {
  RBOptions rb{{1, 2, 4, 8, 16, 24, 32, 48}, 14, 1};
  int tomography_shots = 0;  // 0: exact Pauli vector
  ReadoutModel readout;
};

struct PurityResult {
  std::vector<int> lengths;
  std::vector<std::vector<double>> purity;  // [length][seed]
  DecayFit fit;   // in units of 2m, so fit.alpha is gamma
  double gamma = 1.0;
  double purity_error = 0.0;  // per iSWAP: (3/4)(1 - gamma^(1/iswaps_per_clifford))
};

PurityResult run_purity_rb(const NoiseModel& noise, const PurityOptions& options = {});

struct LeakageResult {
  std::vector<int> lengths;
  std::vector<std::vector<double>> metric;  // [length][seed]
  std::vector<double> mean_metric;
  double asymptote = 1.0;  // mean over the last quarter of the lengths
};

/// Needs the time-domain mode.
LeakageResult run_leakage_rb(const NoiseModel& noise, const RBOptions& options = {});

/// Survival values of one sequence: joint |00>, Q1 ground, Q2 ground.
std::array<double, 3> sequence_survival(const NoiseModel& noise, const std::vector<int>& sequence,
                                        const std::optional<InterleavedGate>& interleave = {});

}  // namespace tbus
