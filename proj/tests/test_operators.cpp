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

#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "tbus/errors.hpp"
#include "tbus/hamiltonian.hpp"
#include "tbus/operators.hpp"

namespace tbus {
namespace {

using testing::random_density;
using testing::random_hermitian;

const HilbertSpace kSpace = device_space();

CMatrix pauli_x() {
  CMatrix x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

CMatrix pauli_z() {
  CMatrix z(2, 2);
  z << 1, 0, 0, -1;
  return z;
}

// Oracle: place a local operator by explicit occupation-number bookkeeping.
CMatrix embed_by_loops(const CMatrix& local, std::size_t pos, const HilbertSpace& space) {
  const int d = space.dimension();
  CMatrix out = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const auto oi = space.occupation(i), oj = space.occupation(j);
      bool same = true;
      for (std::size_t k = 0; k < oi.size(); ++k)
        if (k != pos && oi[k] != oj[k]) same = false;
      if (same) out(i, j) = local(oi[pos], oj[pos]);
    }
  return out;
}

TEST(HilbertSpace, FlatIndexRoundTrip) {
  for (int i = 0; i < kSpace.dimension(); ++i)
    EXPECT_EQ(kSpace.flat_index(kSpace.occupation(i)), i);
  EXPECT_EQ(kSpace.flat_index(std::vector<int>{1, 0, 0}), 9);
  EXPECT_THROW(kSpace.position("Q3"), ConfigError);
}

TEST(Embed, IdentityStaysIdentity) {
  const OperatorMatrix e = embed(CMatrix::Identity(3, 3), "Q1", kSpace);
  EXPECT_LT(max_abs(e.matrix() - CMatrix::Identity(27, 27)), 1e-15);
}

TEST(Embed, BusLoweringOperatorHasEighteenEntries) {
  const OperatorMatrix e = embed(lowering_operator(3), "TB", kSpace);
  int nonzero = 0;
  for (int i = 0; i < 27; ++i)
    for (int j = 0; j < 27; ++j)
      if (std::abs(e.matrix()(i, j)) > 0) ++nonzero;
  EXPECT_EQ(nonzero, 18);
}

TEST(Embed, DisjointSupportsCommute) {
  const HilbertSpace two({2, 2}, {"Q1", "Q2"});
  const CMatrix a = embed(pauli_z(), "Q1", two).matrix();
  const CMatrix b = embed(pauli_z(), "Q2", two).matrix();
  EXPECT_LT(max_abs(a * b - b * a), 1e-15);
}

TEST(Embed, MatchesOccupationOracle) {
  std::mt19937_64 rng(11);
  for (std::size_t pos = 0; pos < 3; ++pos) {
    const CMatrix local = testing::random_complex(3, 3, rng);
    const CMatrix e = embed(local, kSpace.labels()[pos], kSpace).matrix();
    EXPECT_LT(max_abs(e - embed_by_loops(local, pos, kSpace)), 1e-14) << pos;
  }
}

TEST(Embed, PreservesSpectrumWithMultiplicity) {
  std::mt19937_64 rng(12);
  const CMatrix h = random_hermitian(3, rng);
  const RVector local = eigendecompose_hermitian(h).values;
  const RVector full = eigendecompose_hermitian(embed(h, "Q2", kSpace).matrix()).values;
  for (int k = 0; k < 27; ++k) EXPECT_NEAR(full[k], local[k / 9], 1e-12);
}

TEST(Embed, NestedEqualsOneShot) {
  std::mt19937_64 rng(13);
  const CMatrix h = random_hermitian(3, rng);
  const HilbertSpace pair({3, 3}, {"Q2", "TB"});
  const OperatorMatrix inner = embed(h, "TB", pair);
  const OperatorMatrix nested = embed(inner, kSpace);
  const OperatorMatrix direct = embed(h, "TB", kSpace);
  EXPECT_LT(max_abs(nested.matrix() - direct.matrix()), 1e-15);
}

TEST(MatrixExponential, ZeroIsIdentity) {
  std::mt19937_64 rng(14);
  const CMatrix h = random_hermitian(5, rng);
  EXPECT_LT(max_abs(matrix_exponential(h, 0.0) - CMatrix::Identity(5, 5)), 1e-15);
}

TEST(MatrixExponential, HalfTurnAboutX) {
  const CMatrix u = matrix_exponential(pauli_x(), Complex(0.0, -std::numbers::pi / 2));
  EXPECT_LT(max_abs(u - Complex(0.0, -1.0) * pauli_x()), 1e-14);
}

TEST(MatrixExponential, HermitianGeneratorGivesUnitary) {
  std::mt19937_64 rng(15);
  const CMatrix h = random_hermitian(27, rng);
  const CMatrix u = matrix_exponential(h, Complex(0.0, -3.0));
  EXPECT_LT(max_abs(u.adjoint() * u - CMatrix::Identity(27, 27)), 1e-10);
}

TEST(MatrixExponential, GeneralMatrixMatchesTaylorSeries) {
  std::mt19937_64 rng(16);
  const CMatrix a = 0.3 * testing::random_complex(6, 6, rng);
  CMatrix term = CMatrix::Identity(6, 6), sum = term;
  for (int k = 1; k < 40; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  EXPECT_LT(max_abs(matrix_exponential(a, 1.0) - sum), 1e-12);
}

TEST(Eigen, DiagonalSorted) {
  CMatrix d = CMatrix::Zero(3, 3);
  d.diagonal() << 3, 1, 2;
  const auto e = eigendecompose_hermitian(d);
  EXPECT_NEAR(e.values[0], 1, 1e-14);
  EXPECT_NEAR(e.values[1], 2, 1e-14);
  EXPECT_NEAR(e.values[2], 3, 1e-14);
}

TEST(Eigen, PauliX) {
  const auto e = eigendecompose_hermitian(pauli_x());
  EXPECT_NEAR(e.values[0], -1, 1e-14);
  EXPECT_NEAR(e.values[1], 1, 1e-14);
}

TEST(Eigen, ReconstructsDeviceHamiltonian) {
  const OperatorMatrix h = build_full_hamiltonian(DeviceParams::reference_device(), kReferenceBias);
  const auto e = eigendecompose_hermitian(h);
  const CMatrix back = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
  EXPECT_LT(operator_norm(back - h.matrix()), 1e-9 * operator_norm(h.matrix()));
}

TEST(Eigen, RejectsNonHermitian) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(eigendecompose_hermitian(m), ConfigError);
  EXPECT_THROW(OperatorMatrix::hermitian(HilbertSpace({2}, {"Q1"}), m), ConfigError);
}

TEST(PartialTrace, ProductStateMarginal) {
  std::mt19937_64 rng(17);
  const HilbertSpace two({2, 3}, {"A", "B"});
  const CMatrix ra = random_density(2, rng), rb = random_density(3, rng);
  const std::vector<std::string> keep{"A"};
  EXPECT_LT(max_abs(partial_trace(kron(ra, rb), two, keep) - ra), 1e-14);
}

TEST(PartialTrace, BellMarginalIsMaximallyMixed) {
  const HilbertSpace two({2, 2}, {"Q1", "Q2"});
  CVector psi = CVector::Zero(4);
  psi[2] = 1.0 / std::sqrt(2.0);
  psi[1] = Complex(0.0, -1.0 / std::sqrt(2.0));
  const DensityState bell = DensityState::pure(two, psi);
  const std::vector<std::string> keep{"Q1"};
  EXPECT_LT(max_abs(partial_trace(bell, keep).matrix() - 0.5 * CMatrix::Identity(2, 2)), 1e-15);
}

TEST(PartialTrace, TracePreservingAndPositive) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 5; ++trial) {
    const DensityState rho(kSpace, random_density(27, rng));
    const std::vector<std::string> keep{"Q1", "TB"};
    const DensityState r = partial_trace(rho, keep);
    EXPECT_NEAR(r.trace(), 1.0, 1e-12);
    EXPECT_GT(eigendecompose_hermitian(r.matrix()).values[0], -1e-12);
  }
}

TEST(DensityState, RejectsUnphysicalInput) {
  const HilbertSpace one({2}, {"Q1"});
  EXPECT_THROW(DensityState(one, CMatrix::Identity(2, 2)), ConfigError);
  CMatrix neg = CMatrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  EXPECT_THROW(DensityState(one, neg), ConfigError);
}

}  // namespace
}  // namespace tbus
