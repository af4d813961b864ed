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

// Three-level Duffing model of two transmons and the tunable bus, its
// measurement (dressed) basis, and the drive Hamiltonian in the frame
// rotating with the static dressed energies.

#include <array>
#include <compare>
#include <optional>
#include <vector>

#include "tbus/device.hpp"
#include "tbus/operators.hpp"
#include "tbus/pulses.hpp"

namespace tbus {

inline constexpr int kLevels = 3;

/// Q1 (x) Q2 (x) TB, three levels each.
HilbertSpace device_space();

/// Bare occupation numbers of Q1, Q2 and the bus.
struct BareLabel {
  int q1 = 0;
  int q2 = 0;
  int tb = 0;
  auto operator<=>(const BareLabel&) const = default;
};

/// H_N at a static flux, bare product basis, rad/s.
OperatorMatrix build_full_hamiltonian(const DeviceParams& params, double flux);

/// Bus number operator a_TB^dagger a_TB in the bare basis.
CMatrix bus_number_operator();

/// Eigenbasis of the static Hamiltonian with every eigenvector tagged by the
/// bare product state it overlaps most (overlap > 1/2).
class LabeledBasis {
 public:
  LabeledBasis(HilbertSpace space, double theta, RVector energies, CMatrix transform,
               std::vector<std::optional<BareLabel>> labels);

  const HilbertSpace& space() const noexcept { return space_; }
  int dimension() const noexcept { return space_.dimension(); }
  double theta() const noexcept { return theta_; }
  /// Eigen-energies in ascending order, rad/s.
  const RVector& energies() const noexcept { return energies_; }
  /// Columns are eigenvectors in the bare basis (U_N0).
  const CMatrix& transform() const noexcept { return transform_; }

  std::optional<int> find(BareLabel label) const;
  /// Eigen index carrying `label`; throws NumericalError if none does.
  int index(BareLabel label) const;
  const std::optional<BareLabel>& label(int eigen_index) const { return labels_.at(eigen_index); }

  /// Eigen indices of |00>, |01>, |10>, |11> (Q1 is the first digit).
  std::array<int, 4> computational() const;

  /// V^dagger O V: a bare-basis operator expressed in the measurement basis.
  CMatrix to_measurement(const CMatrix& bare_operator) const;

 private:
  HilbertSpace space_;
  double theta_;
  RVector energies_;
  CMatrix transform_;
  std::vector<std::optional<BareLabel>> labels_;
};

/// Diagonalizes H_N at `theta`. Checks the dispersive guard first.
LabeledBasis measurement_basis(const DeviceParams& params, double theta);

/// H_I(t) = [w_TB(Phi(t)) - w_TB(Theta)] e^{iDt} N e^{-iDt}, with D the
/// static energies and N the bus number operator, both in the measurement
/// basis. Zero outside the pulse.
OperatorMatrix interaction_hamiltonian(const DeviceParams& params, const LabeledBasis& basis,
                                       const FluxPulse& pulse, double t);

struct EffectiveModel {
  std::array<double, 2> dressed_frequencies{};  // at Theta, delta = 0
  double exchange_rate = 0.0;        // (delta / 2) dJ/dPhi
  double bare_detuning = 0.0;        // dressed w1 - w2 at delta = 0
  double detuning = 0.0;             // including the drive-induced shifts
  double second_harmonic = 0.0;      // (delta^2 / 4) d^2J/dPhi^2
  // Large-amplitude refinements: first Fourier harmonic of J(Theta + delta cos)
  // (halved, rotating-wave rate) and the cycle-averaged dressed detuning.
  // NaN when the excursion reaches a qubit-bus resonance.
  double harmonic_exchange_rate = 0.0;
  double harmonic_detuning = 0.0;
  bool large_amplitude = false;      // delta > 0.2
};

EffectiveModel effective_model(const DeviceParams& params, double theta, double delta);

}  // namespace tbus
