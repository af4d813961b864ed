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

// Helpers shared by the unit and acceptance tests: seeded random matrices and
// lazily built reference objects that several tests reuse.

#include <cmath>
#include <random>

#include "tbus/calibration.hpp"
#include "tbus/dynamics.hpp"
#include "tbus/operators.hpp"

namespace tbus::testing {

inline CMatrix random_complex(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

inline CMatrix random_hermitian(int d, std::mt19937_64& rng) {
  const CMatrix a = random_complex(d, d, rng);
  return 0.5 * (a + a.adjoint());
}

inline CMatrix random_density(int d, std::mt19937_64& rng) {
  const CMatrix a = random_complex(d, d, rng);
  CMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

inline CVector random_state(int d, std::mt19937_64& rng) {
  CVector v = random_complex(d, 1, rng).col(0);
  return v / v.norm();
}

inline CMatrix random_unitary(int d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<CMatrix> qr(random_complex(d, d, rng));
  return qr.householderQ();
}

inline const Propagator& reference_propagator() {
  static const Propagator p(DeviceParams::reference_device(), kReferenceBias);
  return p;
}

inline const CalibratedGate& reference_iswap() {
  static const CalibratedGate g =
      calibrate_gate(reference_propagator(), 183e-9, GateTarget::kISwap);
  return g;
}

inline const PauliTransferMatrix& reference_iswap_ptm() {
  static const PauliTransferMatrix p =
      build_gate_ptm(reference_propagator(), reference_iswap(),
                     LindbladSpec::from_device(DeviceParams::reference_device()));
  return p;
}

}  // namespace tbus::testing
