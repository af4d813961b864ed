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

#include "tbus/operators.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <unsupported/Eigen/MatrixFunctions>

#include "tbus/errors.hpp"

namespace tbus {

HilbertSpace::HilbertSpace(std::vector<int> dims, std::vector<std::string> labels)
    : dims_(std::move(dims)), labels_(std::move(labels)) {
  if (dims_.empty()) throw ConfigError("HilbertSpace: no subsystems");
  if (dims_.size() != labels_.size())
    throw ConfigError("HilbertSpace: dims and labels differ in length");
  std::set<std::string> seen;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (dims_[k] < 2)
      throw ConfigError("HilbertSpace: subsystem '" + labels_[k] +
                        "' has fewer than 2 levels");
    if (!seen.insert(labels_[k]).second)
      throw ConfigError("HilbertSpace: duplicate label '" + labels_[k] + "'");
    dimension_ *= dims_[k];
  }
}

std::size_t HilbertSpace::position(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end())
    throw ConfigError("HilbertSpace: unknown subsystem label '" +
                      std::string(label) + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

bool HilbertSpace::contains(std::string_view label) const noexcept {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

int HilbertSpace::flat_index(std::span<const int> occupation) const {
  if (occupation.size() != dims_.size())
    throw ConfigError("HilbertSpace: occupation has wrong length");
  int flat = 0;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (occupation[k] < 0 || occupation[k] >= dims_[k])
      throw ConfigError("HilbertSpace: occupation out of range");
    flat = flat * dims_[k] + occupation[k];
  }
  return flat;
}

std::vector<int> HilbertSpace::occupation(int flat) const {
  std::vector<int> occ(dims_.size());
  for (std::size_t k = dims_.size(); k-- > 0;) {
    occ[k] = flat % dims_[k];
    flat /= dims_[k];
  }
  return occ;
}

HilbertSpace HilbertSpace::subspace(std::span<const std::string> keep) const {
  if (keep.empty()) throw ConfigError("HilbertSpace: empty subsystem selection");
  std::vector<bool> kept(dims_.size(), false);
  for (const auto& l : keep) kept[position(l)] = true;
  std::vector<int> d;
  std::vector<std::string> l;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (!kept[k]) continue;
    d.push_back(dims_[k]);
    l.push_back(labels_[k]);
  }
  return HilbertSpace(std::move(d), std::move(l));
}

namespace {

double hermitian_defect(const CMatrix& m) {
  const double scale = std::max(1.0, max_abs(m));
  return max_abs(m - m.adjoint()) / scale;
}

}  // namespace

OperatorMatrix::OperatorMatrix(HilbertSpace space, CMatrix entries, Unit unit)
    : space_(std::move(space)), entries_(std::move(entries)), unit_(unit) {
  if (entries_.rows() != entries_.cols())
    throw ConfigError("OperatorMatrix: matrix is not square");
  if (entries_.rows() != space_.dimension())
    throw ConfigError("OperatorMatrix: matrix size does not match space dimension");
}

OperatorMatrix OperatorMatrix::hermitian(HilbertSpace space, CMatrix entries,
                                         Unit unit) {
  OperatorMatrix op(std::move(space), std::move(entries), unit);
  if (!op.is_hermitian())
    throw ConfigError("OperatorMatrix: entries are not Hermitian");
  op.hermitian_ = true;
  return op;
}

bool OperatorMatrix::is_hermitian(double rel_tol) const {
  return hermitian_defect(entries_) <= rel_tol;
}

DensityState::DensityState(HilbertSpace space, CMatrix rho)
    : space_(std::move(space)), rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() != space_.dimension())
    throw ConfigError("DensityState: matrix size does not match space");
  if (max_abs(rho_ - rho_.adjoint()) > 1e-10)
    throw ConfigError("DensityState: matrix is not Hermitian");
  if (std::abs(rho_.trace().real() - 1.0) > 1e-9)
    throw ConfigError("DensityState: trace is not 1");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(
      0.5 * (rho_ + rho_.adjoint()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9)
    throw ConfigError("DensityState: matrix has a negative eigenvalue");
}

DensityState DensityState::pure(HilbertSpace space, const CVector& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw ConfigError("DensityState: zero state vector");
  CVector v = psi / n;
  return DensityState(std::move(space), v * v.adjoint());
}

OperatorMatrix identity(const HilbertSpace& space) {
  return OperatorMatrix::hermitian(
      space, CMatrix::Identity(space.dimension(), space.dimension()));
}

CMatrix lowering_operator(int levels) {
  CMatrix a = CMatrix::Zero(levels, levels);
  for (int n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

OperatorMatrix embed(const OperatorMatrix& op, const HilbertSpace& space) {
  const HilbertSpace& local = op.space();
  std::vector<std::size_t> where(local.num_subsystems());
  for (std::size_t k = 0; k < local.num_subsystems(); ++k) {
    where[k] = space.position(local.labels()[k]);
    if (space.dims()[where[k]] != local.dims()[k])
      throw ConfigError("embed: dimension mismatch for subsystem '" +
                        local.labels()[k] + "'");
  }
  std::vector<bool> covered(space.num_subsystems(), false);
  for (auto w : where) covered[w] = true;

  const int n = space.dimension();
  std::vector<int> local_index(n);
  std::vector<int> rest_index(n);
  for (int f = 0; f < n; ++f) {
    const auto occ = space.occupation(f);
    int li = 0;
    for (std::size_t k = 0; k < where.size(); ++k)
      li = li * local.dims()[k] + occ[where[k]];
    int ri = 0;
    for (std::size_t k = 0; k < occ.size(); ++k)
      if (!covered[k]) ri = ri * space.dims()[k] + occ[k];
    local_index[f] = li;
    rest_index[f] = ri;
  }
  CMatrix out = CMatrix::Zero(n, n);
  const CMatrix& m = op.matrix();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (rest_index[i] == rest_index[j]) out(i, j) = m(local_index[i], local_index[j]);
  OperatorMatrix result(space, std::move(out), op.unit());
  return op.flagged_hermitian()
             ? OperatorMatrix::hermitian(space, result.matrix(), op.unit())
             : result;
}

OperatorMatrix embed(const CMatrix& local_op, std::string_view label,
                     const HilbertSpace& space, Unit unit) {
  const int d = space.subsystem_dim(label);
  if (local_op.rows() != d || local_op.cols() != d)
    throw ConfigError("embed: local operator dimension does not match subsystem '" +
                      std::string(label) + "'");
  return embed(OperatorMatrix(HilbertSpace({d}, {std::string(label)}), local_op, unit),
               space);
}

OperatorMatrix embed(const OperatorMatrix& local_op, std::string_view label,
                     const HilbertSpace& space) {
  if (local_op.space().num_subsystems() != 1)
    throw ConfigError("embed: expected a single-subsystem operator");
  OperatorMatrix relabeled(
      HilbertSpace({local_op.space().dimension()}, {std::string(label)}),
      local_op.matrix(), local_op.unit());
  if (local_op.space().dimension() != space.subsystem_dim(label))
    throw ConfigError("embed: local operator dimension does not match subsystem '" +
                      std::string(label) + "'");
  return embed(local_op.flagged_hermitian()
                   ? OperatorMatrix::hermitian(relabeled.space(), relabeled.matrix(),
                                               relabeled.unit())
                   : relabeled,
               space);
}

CMatrix matrix_exponential(const CMatrix& op, Complex scalar) {
  if (op.rows() != op.cols()) throw ConfigError("matrix_exponential: not square");
  if (!op.allFinite() || !std::isfinite(scalar.real()) || !std::isfinite(scalar.imag()))
    throw ConfigError("matrix_exponential: non-finite entries");
  if (scalar.real() == 0.0 && hermitian_defect(op) <= 1e-10) {
    const HermitianEigen eig = eigendecompose_hermitian(op);
    CVector phases(eig.values.size());
    for (Eigen::Index k = 0; k < phases.size(); ++k)
      phases[k] = std::exp(scalar * eig.values[k]);
    return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
  }
  CMatrix scaled = scalar * op;
  return scaled.exp();
}

OperatorMatrix matrix_exponential(const OperatorMatrix& op, Complex scalar) {
  return OperatorMatrix(op.space(), matrix_exponential(op.matrix(), scalar));
}

HermitianEigen eigendecompose_hermitian(const CMatrix& op) {
  if (op.rows() != op.cols()) throw ConfigError("eigendecompose_hermitian: not square");
  if (hermitian_defect(op) > 1e-10)
    throw ConfigError("eigendecompose_hermitian: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (op + op.adjoint()));
  if (es.info() != Eigen::Success)
    throw NumericalError("operators", "Hermitian eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

HermitianEigen eigendecompose_hermitian(const OperatorMatrix& op) {
  return eigendecompose_hermitian(op.matrix());
}

CMatrix partial_trace(const CMatrix& rho, const HilbertSpace& space,
                      std::span<const std::string> keep_labels) {
  const HilbertSpace kept = space.subspace(keep_labels);
  std::vector<bool> keep(space.num_subsystems(), false);
  for (const auto& l : keep_labels) keep[space.position(l)] = true;

  const int n = space.dimension();
  std::vector<int> kept_index(n), traced_index(n);
  for (int f = 0; f < n; ++f) {
    const auto occ = space.occupation(f);
    int ki = 0, ti = 0;
    for (std::size_t k = 0; k < occ.size(); ++k) {
      if (keep[k]) ki = ki * space.dims()[k] + occ[k];
      else ti = ti * space.dims()[k] + occ[k];
    }
    kept_index[f] = ki;
    traced_index[f] = ti;
  }
  CMatrix out = CMatrix::Zero(kept.dimension(), kept.dimension());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (traced_index[i] == traced_index[j])
        out(kept_index[i], kept_index[j]) += rho(i, j);
  return out;
}

DensityState partial_trace(const DensityState& state,
                           std::span<const std::string> keep_labels) {
  if (keep_labels.empty()) throw ConfigError("partial_trace: empty keep set");
  return DensityState(state.space().subspace(keep_labels),
                      partial_trace(state.matrix(), state.space(), keep_labels));
}

double operator_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace tbus
