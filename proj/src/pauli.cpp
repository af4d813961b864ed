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

#include "tbus/pauli.hpp"

#include <bit>
#include <cmath>

#include "tbus/errors.hpp"

namespace tbus {

CMatrix pauli_matrix(int which) {
  CMatrix p(2, 2);
  switch (which) {
    case 0: p << 1, 0, 0, 1; break;
    case 1: p << 0, 1, 1, 0; break;
    case 2: p << 0, -kI, kI, 0; break;
    case 3: p << 1, 0, 0, -1; break;
    default: throw ConfigError("pauli_matrix: index must be 0..3");
  }
  return p;
}

CMatrix pauli_string(int index, int num_qubits) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int q = num_qubits - 1; q >= 0; --q) {
    const int digit = (index >> (2 * q)) & 3;
    out = kron(out, pauli_matrix(digit));
  }
  return out;
}

std::string pauli_label(int index, int num_qubits) {
  static constexpr char kNames[] = {'I', 'X', 'Y', 'Z'};
  std::string s;
  for (int q = num_qubits - 1; q >= 0; --q) s += kNames[(index >> (2 * q)) & 3];
  return s;
}

namespace {

int qubits_for_dimension(Eigen::Index d) {
  if (d < 2 || (d & (d - 1)) != 0) throw ConfigError("Pauli basis needs a power-of-two dimension");
  return std::countr_zero(static_cast<unsigned>(d));
}

const std::vector<CMatrix>& pauli_basis(int num_qubits) {
  static const std::vector<CMatrix> one = [] {
    std::vector<CMatrix> b;
    for (int i = 0; i < 4; ++i) b.push_back(pauli_string(i, 1));
    return b;
  }();
  static const std::vector<CMatrix> two = [] {
    std::vector<CMatrix> b;
    for (int i = 0; i < 16; ++i) b.push_back(pauli_string(i, 2));
    return b;
  }();
  if (num_qubits == 1) return one;
  if (num_qubits == 2) return two;
  throw ConfigError("Pauli basis supports one or two qubits");
}

}  // namespace

RVector pauli_vector(const CMatrix& rho) {
  const int n = qubits_for_dimension(rho.rows());
  const auto& basis = pauli_basis(n);
  RVector v(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = (basis[i] * rho).trace().real();
  return v;
}

CMatrix from_pauli_vector(const RVector& v) {
  const int n = v.size() == 4 ? 1 : v.size() == 16 ? 2 : 0;
  if (n == 0) throw ConfigError("from_pauli_vector: expected 4 or 16 components");
  const auto& basis = pauli_basis(n);
  const int d = 1 << n;
  CMatrix rho = CMatrix::Zero(d, d);
  for (std::size_t i = 0; i < basis.size(); ++i) rho += v[static_cast<Eigen::Index>(i)] * basis[i];
  return rho / static_cast<double>(d);
}

PauliTransferMatrix::PauliTransferMatrix(RMatrix r) : r_(std::move(r)) {
  if (r_.rows() != r_.cols() || (r_.rows() != 4 && r_.rows() != 16))
    throw ConfigError("PauliTransferMatrix: expected a 4x4 or 16x16 matrix");
  num_qubits_ = r_.rows() == 4 ? 1 : 2;
}

PauliTransferMatrix PauliTransferMatrix::identity(int num_qubits) {
  const int n = 1 << (2 * num_qubits);
  return PauliTransferMatrix(RMatrix::Identity(n, n));
}

PauliTransferMatrix PauliTransferMatrix::from_channel(const OperatorChannel& channel,
                                                      int num_qubits) {
  const auto& basis = pauli_basis(num_qubits);
  const auto n = static_cast<Eigen::Index>(basis.size());
  const double d = static_cast<double>(1 << num_qubits);
  RMatrix r(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const CMatrix out = channel(basis[j]);
    for (Eigen::Index i = 0; i < n; ++i) r(i, j) = (basis[i] * out).trace().real() / d;
  }
  return PauliTransferMatrix(std::move(r));
}

PauliTransferMatrix PauliTransferMatrix::from_unitary(const CMatrix& u) {
  const int n = qubits_for_dimension(u.rows());
  return from_channel([&u](const CMatrix& p) -> CMatrix { return u * p * u.adjoint(); }, n);
}

PauliTransferMatrix PauliTransferMatrix::depolarizing(double p, int num_qubits) {
  PauliTransferMatrix out = identity(num_qubits);
  for (Eigen::Index k = 1; k < out.r_.rows(); ++k) out.r_(k, k) = p;
  return out;
}

PauliTransferMatrix PauliTransferMatrix::then(const PauliTransferMatrix& next) const {
  if (next.num_qubits_ != num_qubits_) throw ConfigError("PTM composition: qubit count mismatch");
  return PauliTransferMatrix(next.r_ * r_);
}

CMatrix PauliTransferMatrix::apply(const CMatrix& rho) const {
  return from_pauli_vector(r_ * pauli_vector(rho));
}

bool PauliTransferMatrix::is_trace_preserving(double tol) const {
  if (std::abs(r_(0, 0) - 1.0) > tol) return false;
  for (Eigen::Index j = 1; j < r_.cols(); ++j)
    if (std::abs(r_(0, j)) > tol) return false;
  return true;
}

double PauliTransferMatrix::process_fidelity(const PauliTransferMatrix& ideal) const {
  const double d = static_cast<double>(dimension());
  return (ideal.r_.transpose() * r_).trace() / (d * d);
}

double PauliTransferMatrix::process_fidelity(const CMatrix& ideal_unitary) const {
  return process_fidelity(from_unitary(ideal_unitary));
}

}  // namespace tbus
