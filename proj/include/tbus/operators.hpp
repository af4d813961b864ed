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

// Dense linear algebra on labeled tensor-product Hilbert spaces.

#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace tbus {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Ordered tensor product of labeled subsystems. The first subsystem is the
/// most significant digit of the flat index.
class HilbertSpace {
 public:
  HilbertSpace(std::vector<int> dims, std::vector<std::string> labels);

  int dimension() const noexcept { return dimension_; }
  std::size_t num_subsystems() const noexcept { return dims_.size(); }
  const std::vector<int>& dims() const noexcept { return dims_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Position of `label` in subsystem order. Throws ConfigError if unknown.
  std::size_t position(std::string_view label) const;
  bool contains(std::string_view label) const noexcept;
  int subsystem_dim(std::string_view label) const { return dims_[position(label)]; }

  int flat_index(std::span<const int> occupation) const;
  std::vector<int> occupation(int flat) const;

  /// Space made of the kept labels, in this space's order.
  HilbertSpace subspace(std::span<const std::string> keep) const;

  bool operator==(const HilbertSpace&) const = default;

 private:
  std::vector<int> dims_;
  std::vector<std::string> labels_;
  int dimension_ = 1;
};

enum class Unit { kDimensionless, kAngularFrequency };

/// Square complex matrix tied to a Hilbert space. Angular-frequency entries
/// are in rad/s.
class OperatorMatrix {
 public:
  OperatorMatrix(HilbertSpace space, CMatrix entries,
                 Unit unit = Unit::kDimensionless);

  /// Builds an operator flagged Hermitian; throws if the entries are not
  /// Hermitian to 1e-10 relative.
  static OperatorMatrix hermitian(HilbertSpace space, CMatrix entries,
                                  Unit unit = Unit::kDimensionless);

  const HilbertSpace& space() const noexcept { return space_; }
  const CMatrix& matrix() const noexcept { return entries_; }
  Unit unit() const noexcept { return unit_; }
  bool flagged_hermitian() const noexcept { return hermitian_; }

  bool is_hermitian(double rel_tol = 1e-10) const;

 private:
  HilbertSpace space_;
  CMatrix entries_;
  Unit unit_;
  bool hermitian_ = false;
};

/// Density matrix. Construction enforces Hermiticity (1e-10), unit trace
/// (1e-9) and eigenvalues >= -1e-9.
class DensityState {
 public:
  DensityState(HilbertSpace space, CMatrix rho);

  static DensityState pure(HilbertSpace space, const CVector& psi);

  const HilbertSpace& space() const noexcept { return space_; }
  const CMatrix& matrix() const noexcept { return rho_; }
  double trace() const { return rho_.trace().real(); }
  double purity() const { return (rho_ * rho_).trace().real(); }

 private:
  HilbertSpace space_;
  CMatrix rho_;
};

struct HermitianEigen {
  RVector values;   // ascending
  CMatrix vectors;  // columns
};

OperatorMatrix identity(const HilbertSpace& space);

/// Truncated annihilation operator on `levels` levels.
CMatrix lowering_operator(int levels);

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Embeds an operator defined on a subset of `space`'s subsystems (its own
/// space's labels, any order) into `space`, identity elsewhere.
OperatorMatrix embed(const OperatorMatrix& op, const HilbertSpace& space);

/// Embeds a single-subsystem operator at `label`.
OperatorMatrix embed(const CMatrix& local_op, std::string_view label,
                     const HilbertSpace& space, Unit unit = Unit::kDimensionless);
OperatorMatrix embed(const OperatorMatrix& local_op, std::string_view label,
                     const HilbertSpace& space);

/// exp(scalar * op). Hermitian operators with a purely imaginary scalar go
/// through the spectral route and stay unitary to rounding; everything else
/// uses scaling and squaring.
OperatorMatrix matrix_exponential(const OperatorMatrix& op, Complex scalar);
CMatrix matrix_exponential(const CMatrix& op, Complex scalar);

/// Symmetrizes (H + H^dagger)/2 and diagonalizes. Throws ConfigError on
/// non-Hermitian input.
HermitianEigen eigendecompose_hermitian(const OperatorMatrix& op);
HermitianEigen eigendecompose_hermitian(const CMatrix& op);

DensityState partial_trace(const DensityState& state,
                           std::span<const std::string> keep_labels);
CMatrix partial_trace(const CMatrix& rho, const HilbertSpace& space,
                      std::span<const std::string> keep_labels);

double operator_norm(const CMatrix& m);  // largest singular value
double max_abs(const CMatrix& m);

}  // namespace tbus
