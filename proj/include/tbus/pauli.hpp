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

// Pauli operator basis and Pauli transfer matrices.
//
// Pauli strings are indexed in base 4 with the first qubit as the most
// significant digit and I, X, Y, Z = 0, 1, 2, 3, so the two-qubit order is
// II, IX, IY, IZ, XI, ..., ZZ.

#include <functional>
#include <string>

#include "tbus/operators.hpp"

namespace tbus {

CMatrix pauli_matrix(int which);  // 2x2; 0..3 = I, X, Y, Z
CMatrix pauli_string(int index, int num_qubits);
std::string pauli_label(int index, int num_qubits);

/// v_i = Tr(P_i rho).
RVector pauli_vector(const CMatrix& rho);
/// rho = (1/d) sum_i v_i P_i.
CMatrix from_pauli_vector(const RVector& v);

using OperatorChannel = std::function<CMatrix(const CMatrix&)>;

/// R_ij = Tr(P_i E(P_j)) / d.
class PauliTransferMatrix {
 public:
  explicit PauliTransferMatrix(RMatrix r);

  static PauliTransferMatrix identity(int num_qubits);
  static PauliTransferMatrix from_unitary(const CMatrix& u);
  /// Builds the PTM by applying `channel` to every Pauli operator.
  static PauliTransferMatrix from_channel(const OperatorChannel& channel, int num_qubits);
  /// rho -> p rho + (1 - p) Tr(rho) I/d.
  static PauliTransferMatrix depolarizing(double p, int num_qubits);

  int num_qubits() const noexcept { return num_qubits_; }
  int dimension() const noexcept { return 1 << num_qubits_; }
  const RMatrix& matrix() const noexcept { return r_; }

  /// `next` applied after this channel.
  PauliTransferMatrix then(const PauliTransferMatrix& next) const;
  RVector apply(const RVector& pauli_vec) const { return r_ * pauli_vec; }
  CMatrix apply(const CMatrix& rho) const;

  bool is_trace_preserving(double tol = 1e-6) const;
  /// Tr(E(I))/d, 1 for trace-preserving channels.
  double trace_retention() const { return r_(0, 0); }

  /// Tr(R_ideal^T R) / d^2.
  double process_fidelity(const CMatrix& ideal_unitary) const;
  double process_fidelity(const PauliTransferMatrix& ideal) const;

 private:
  RMatrix r_;
  int num_qubits_;
};

}  // namespace tbus
