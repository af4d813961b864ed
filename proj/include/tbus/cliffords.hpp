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

// One- and two-qubit Clifford groups as stabilizer tableaux, with iSWAP-count
// minimal decompositions of two-qubit elements and RB sequence sampling.
//
// Qubit 0 is Q1, the most significant digit of the computational index.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tbus/operators.hpp"

namespace tbus {

/// i^phase * prod_q X_q^{x_q} Z_q^{z_q}; bit q of x/z refers to qubit q.
struct PauliOperator {
  std::uint8_t x = 0;
  std::uint8_t z = 0;
  std::uint8_t phase = 0;  // mod 4
  bool operator==(const PauliOperator&) const = default;
};

PauliOperator multiply(const PauliOperator& a, const PauliOperator& b);
CMatrix to_matrix(const PauliOperator& p, int num_qubits);

/// Images of X_q and Z_q under conjugation, C P C^dagger; global phase is
/// not represented.
class Tableau {
 public:
  explicit Tableau(int num_qubits);

  int num_qubits() const noexcept { return n_; }
  const PauliOperator& image_x(int q) const { return images_[2 * q]; }
  const PauliOperator& image_z(int q) const { return images_[2 * q + 1]; }

  PauliOperator conjugate(const PauliOperator& p) const;
  /// `next` applied after this element.
  Tableau then(const Tableau& next) const;
  std::uint32_t key() const;

  /// Tableau of a Clifford unitary; throws ConfigError if `u` is not Clifford.
  static Tableau from_unitary(const CMatrix& u);

 private:
  int n_;
  std::array<PauliOperator, 4> images_{};
};

/// H, S and the exchange gate exp(-i pi/4 (XX + YY)).
CMatrix hadamard();
CMatrix phase_gate();
CMatrix iswap_unitary();

/// Time-ordered decomposition step: a layer of single-qubit Cliffords
/// (indices into the one-qubit group) or one iSWAP.
struct DecompositionStep {
  bool iswap = false;
  int q1 = 0;
  int q2 = 0;
};

class CliffordGroup {
 public:
  /// Built once on first use; immutable afterwards.
  static const CliffordGroup& one_qubit();
  static const CliffordGroup& two_qubit();
  static const CliffordGroup& for_qubits(int n);

  int num_qubits() const noexcept { return n_; }
  int size() const noexcept { return static_cast<int>(tableaux_.size()); }
  int identity() const noexcept { return 0; }

  const Tableau& tableau(int i) const { return tableaux_.at(i); }
  /// Representative unitary (global phase arbitrary).
  const CMatrix& unitary(int i) const { return unitaries_.at(i); }

  /// Index of `second` applied after `first`.
  int compose(int first, int second) const;
  int inverse(int i) const { return inverses_.at(i); }
  std::optional<int> find(const Tableau& t) const;
  int index_of_unitary(const CMatrix& u) const;

  // Two-qubit structure.
  int iswap_element() const;
  int local_element(int c1_first, int c1_second) const;
  int iswap_count(int i) const;
  const std::vector<DecompositionStep>& decomposition(int i) const;
  double average_iswap_count() const;
  std::vector<int> iswap_class_sizes() const;

 private:
  explicit CliffordGroup(int n);
  void enumerate(const std::vector<CMatrix>& generators);
  void build_decompositions();

  int n_;
  std::vector<Tableau> tableaux_;
  std::vector<CMatrix> unitaries_;
  std::vector<int> inverses_;
  std::vector<std::int32_t> lookup_;  // key -> index, -1 if absent
  std::vector<int> iswap_counts_;
  std::vector<std::vector<DecompositionStep>> decompositions_;
};

/// Unitary product of a decomposition, in time order.
CMatrix recompose(const std::vector<DecompositionStep>& steps);

/// |Tr(U^dagger V)|^2 / d^2: 1 when equal up to global phase.
double phase_insensitive_overlap(const CMatrix& u, const CMatrix& v);

/// m uniformly random elements (each followed by `interleave` when given)
/// and the recovery element, whose product is the identity.
std::vector<int> sample_rb_sequence(const CliffordGroup& group, int length, std::uint64_t seed,
                                    std::optional<int> interleave = std::nullopt);

/// JSON text {"num_qubits", "seed", "length", "interleave", "elements"}.
std::string sequence_to_json(const CliffordGroup& group, const std::vector<int>& sequence,
                             std::uint64_t seed, int length, std::optional<int> interleave);

}  // namespace tbus
