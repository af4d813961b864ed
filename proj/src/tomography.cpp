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

#include "tbus/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tbus/dynamics.hpp"
#include "tbus/errors.hpp"

namespace tbus {

void ReadoutModel::validate() const {
  for (double f : fidelity) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("readout fidelity must lie in [0, 1]");
    if (std::abs(f - 0.5) < 1e-9) throw ConfigError("readout fidelity 0.5 gives a singular confusion matrix");
  }
}

RMatrix ReadoutModel::confusion() const {
  auto single = [](double f) {
    RMatrix m(2, 2);
    m << f, 1.0 - f, 1.0 - f, f;
    return m;
  };
  const RMatrix a = single(fidelity[0]);
  const RMatrix b = single(fidelity[1]);
  RMatrix m(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
  return m;
}

namespace {

// Rotation taking the eigenbasis of the Pauli `which` to the Z basis.
CMatrix basis_change(int which) {
  const double s = std::numbers::sqrt2 / 2.0;
  CMatrix r(2, 2);
  switch (which) {
    case 1: r << s, s, s, -s; break;                  // H
    case 2: r << s, -kI * s, s, kI * s; break;        // H S^dagger
    case 3: r = CMatrix::Identity(2, 2); break;
    default: throw ConfigError("measurement setting must be X, Y or Z");
  }
  return r;
}

std::array<int, 4> multinomial(const std::array<double, 4>& p, int shots, Rng& rng) {
  std::array<int, 4> counts{};
  double remaining = 1.0;
  int left = shots;
  for (int k = 0; k < 3 && left > 0; ++k) {
    const double q = remaining > 0.0 ? std::clamp(p[k] / remaining, 0.0, 1.0) : 0.0;
    counts[k] = static_cast<int>(rng.binomial(static_cast<std::uint64_t>(left), q));
    left -= counts[k];
    remaining -= p[k];
  }
  counts[3] = left;
  return counts;
}

// Adds the expectation contributions of one setting's corrected distribution.
void accumulate(const std::array<int, 2>& setting, const RVector& p, RVector& sum,
                RVector& weight) {
  const int s1 = setting[0];
  const int s2 = setting[1];
  double e1 = 0.0, e2 = 0.0, e12 = 0.0;
  for (int o = 0; o < 4; ++o) {
    const double sign1 = (o & 2) ? -1.0 : 1.0;
    const double sign2 = (o & 1) ? -1.0 : 1.0;
    e1 += sign1 * p[o];
    e2 += sign2 * p[o];
    e12 += sign1 * sign2 * p[o];
  }
  sum[4 * s1] += e1;
  weight[4 * s1] += 1.0;
  sum[s2] += e2;
  weight[s2] += 1.0;
  sum[4 * s1 + s2] += e12;
  weight[4 * s1 + s2] += 1.0;
}

const std::vector<std::array<int, 2>>& all_settings() {
  static const std::vector<std::array<int, 2>> s = [] {
    std::vector<std::array<int, 2>> v;
    for (int a = 1; a <= 3; ++a)
      for (int b = 1; b <= 3; ++b) v.push_back({a, b});
    return v;
  }();
  return s;
}

}  // namespace

std::array<double, 4> setting_probabilities(const CMatrix& rho, std::array<int, 2> setting) {
  if (rho.rows() != 4 || rho.cols() != 4) throw ConfigError("tomography expects a 4x4 state");
  const CMatrix r = kron(basis_change(setting[0]), basis_change(setting[1]));
  const CMatrix rotated = r * rho * r.adjoint();
  std::array<double, 4> p{};
  double total = 0.0;
  for (int o = 0; o < 4; ++o) {
    p[o] = std::max(0.0, rotated(o, o).real());
    total += p[o];
  }
  if (!(total > 0.0)) throw ConfigError("tomography: state has no population");
  for (double& x : p) x /= total;
  return p;
}

std::vector<MeasurementRecord> simulate_measurements(const CMatrix& rho, int total_shots,
                                                     const ReadoutModel& readout, Rng& rng) {
  readout.validate();
  const auto& settings = all_settings();
  if (total_shots < static_cast<int>(settings.size()))
    throw ConfigError("tomography: need at least one shot per setting");
  const RMatrix m = readout.confusion();
  std::vector<MeasurementRecord> records;
  const int per = total_shots / static_cast<int>(settings.size());
  int extra = total_shots % static_cast<int>(settings.size());
  for (const auto& s : settings) {
    const auto p = setting_probabilities(rho, s);
    RVector pt(4);
    for (int o = 0; o < 4; ++o) pt[o] = p[o];
    const RVector pm = m * pt;
    MeasurementRecord rec;
    rec.setting = s;
    rec.shots = per + (extra-- > 0 ? 1 : 0);
    rec.readout = readout;
    rec.counts = multinomial({pm[0], pm[1], pm[2], pm[3]}, rec.shots, rng);
    records.push_back(rec);
  }
  return records;
}

RVector pauli_expectations(const std::vector<MeasurementRecord>& records) {
  RVector sum = RVector::Zero(16);
  RVector weight = RVector::Zero(16);
  for (const auto& rec : records) {
    rec.readout.validate();
    if (rec.shots <= 0) throw ConfigError("tomography: record without shots");
    RVector freq(4);
    for (int o = 0; o < 4; ++o) freq[o] = static_cast<double>(rec.counts[o]) / rec.shots;
    const RVector corrected = rec.readout.confusion().partialPivLu().solve(freq);
    accumulate(rec.setting, corrected, sum, weight);
  }
  RVector v = RVector::Zero(16);
  v[0] = 1.0;
  for (int i = 1; i < 16; ++i) {
    if (weight[i] == 0.0) throw ConfigError("tomography: Pauli " + pauli_label(i, 2) + " not measured");
    v[i] = sum[i] / weight[i];
  }
  return v;
}

CMatrix project_to_physical(const CMatrix& estimate) {
  const CMatrix h = 0.5 * (estimate + estimate.adjoint());
  const HermitianEigen eig = eigendecompose_hermitian(h);
  const double tr = eig.values.sum();
  if (!(tr > 0.0)) throw NumericalError("tomography", "estimate has non-positive trace");
  // Eigenvalues ascending; truncate from the bottom.
  RVector lambda = eig.values / tr;
  const Eigen::Index d = lambda.size();
  double carried = 0.0;
  Eigen::Index i = 0;
  for (; i < d; ++i) {
    const double remaining = static_cast<double>(d - i);
    if (lambda[i] + carried / remaining >= 0.0) break;
    carried += lambda[i];
    lambda[i] = 0.0;
  }
  for (Eigen::Index j = i; j < d; ++j) lambda[j] += carried / static_cast<double>(d - i);
  CMatrix rho = eig.vectors * lambda.asDiagonal() * eig.vectors.adjoint();
  return 0.5 * (rho + rho.adjoint());
}

StateTomographyResult state_tomography(const CMatrix& rho, int shots, const ReadoutModel& readout,
                                       Rng& rng) {
  readout.validate();
  StateTomographyResult r;
  if (shots == 0) {
    const double tr = rho.trace().real();
    if (!(tr > 0.0)) throw ConfigError("tomography: state has no population");
    r.pauli = pauli_vector(rho) / tr;
  } else {
    r.records = simulate_measurements(rho, shots, readout, rng);
    r.pauli = pauli_expectations(r.records);
  }
  r.linear = from_pauli_vector(r.pauli);
  r.mle = project_to_physical(r.linear);
  return r;
}

double state_fidelity(const CMatrix& rho, const CVector& psi) {
  if (rho.rows() != psi.size()) throw ConfigError("state_fidelity: dimension mismatch");
  const double n = psi.squaredNorm();
  if (!(n > 0.0)) throw ConfigError("state_fidelity: zero target state");
  return std::clamp(psi.dot(rho * psi).real() / n, 0.0, 1.0);
}

double state_fidelity(const CMatrix& rho, const CMatrix& sigma) {
  if (rho.rows() != sigma.rows()) throw ConfigError("state_fidelity: dimension mismatch");
  const HermitianEigen a = eigendecompose_hermitian(rho);
  const HermitianEigen b = eigendecompose_hermitian(sigma);
  if (a.values.minCoeff() < -1e-8 || b.values.minCoeff() < -1e-8)
    throw ConfigError("state_fidelity: input is not positive semidefinite");
  const RVector root = a.values.cwiseMax(0.0).cwiseSqrt();
  const CMatrix sq = a.vectors * root.asDiagonal() * a.vectors.adjoint();
  const HermitianEigen m = eigendecompose_hermitian(CMatrix(sq * sigma * sq));
  const double s = m.values.cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(s * s, 0.0, 1.0);
}

std::vector<CMatrix> process_tomography_inputs() {
  const double s = std::numbers::sqrt2 / 2.0;
  std::array<CVector, 4> single;
  for (auto& v : single) v = CVector::Zero(2);
  single[0] << 1.0, 0.0;
  single[1] << 0.0, 1.0;
  single[2] << s, s;
  single[3] << s, kI * s;
  std::vector<CMatrix> inputs;
  for (const auto& a : single)
    for (const auto& b : single) {
      CVector psi(4);
      psi << a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1];
      inputs.push_back(psi * psi.adjoint());
    }
  return inputs;
}

ProcessTomographyResult process_tomography(const OperatorChannel& channel, const CMatrix& ideal,
                                           int shots, const ReadoutModel& readout, Rng& rng) {
  const auto inputs = process_tomography_inputs();
  RMatrix a(16, 16), b_lin(16, 16), b_mle(16, 16);
  for (int k = 0; k < 16; ++k) {
    a.col(k) = pauli_vector(inputs[k]);
    const StateTomographyResult st = state_tomography(channel(inputs[k]), shots, readout, rng);
    b_lin.col(k) = st.pauli;
    b_mle.col(k) = pauli_vector(st.mle);
  }
  const auto lu = a.transpose().partialPivLu();
  // R A = B  =>  A^T R^T = B^T.
  PauliTransferMatrix lin(RMatrix(lu.solve(b_lin.transpose()).transpose()));
  PauliTransferMatrix mle(RMatrix(lu.solve(b_mle.transpose()).transpose()));
  ProcessTomographyResult r{lin, mle};
  r.process_fidelity_linear = lin.process_fidelity(ideal);
  r.process_fidelity_mle = mle.process_fidelity(ideal);
  FidelityOptions opts;
  opts.trace_tolerance = 1e-6;
  r.average_fidelity_linear = average_gate_fidelity(lin, ideal, opts);
  r.average_fidelity_mle = average_gate_fidelity(mle, ideal, opts);
  return r;
}

}  // namespace tbus
