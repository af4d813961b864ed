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

#include "tbus/hamiltonian.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tbus/errors.hpp"

namespace tbus {

namespace {

CMatrix duffing(double omega, double alpha) {
  const CMatrix a = lowering_operator(kLevels);
  const CMatrix n = a.adjoint() * a;
  const CMatrix id = CMatrix::Identity(kLevels, kLevels);
  return omega * n - 0.5 * alpha * (id - n) * n;
}

std::string to_string(const BareLabel& l) {
  return "|" + std::to_string(l.q1) + std::to_string(l.q2) + std::to_string(l.tb) + ">";
}

}  // namespace

HilbertSpace device_space() {
  return HilbertSpace({kLevels, kLevels, kLevels}, {"Q1", "Q2", "TB"});
}

OperatorMatrix build_full_hamiltonian(const DeviceParams& params, double flux) {
  const HilbertSpace space = device_space();
  const CMatrix a = lowering_operator(kLevels);
  const CMatrix x = a + a.adjoint();
  CMatrix h = embed(duffing(params.omega_q[0], params.alpha_q[0]), "Q1", space).matrix() +
              embed(duffing(params.omega_q[1], params.alpha_q[1]), "Q2", space).matrix() +
              embed(duffing(bus_frequency(params, flux), params.alpha_tb), "TB", space).matrix();
  const CMatrix x_tb = embed(x, "TB", space).matrix();
  h += params.g_q[0] * embed(x, "Q1", space).matrix() * x_tb;
  h += params.g_q[1] * embed(x, "Q2", space).matrix() * x_tb;
  return OperatorMatrix::hermitian(space, 0.5 * (h + h.adjoint()), Unit::kAngularFrequency);
}

CMatrix bus_number_operator() {
  const CMatrix a = lowering_operator(kLevels);
  return embed(CMatrix(a.adjoint() * a), "TB", device_space()).matrix();
}

LabeledBasis::LabeledBasis(HilbertSpace space, double theta, RVector energies,
                           CMatrix transform, std::vector<std::optional<BareLabel>> labels)
    : space_(std::move(space)),
      theta_(theta),
      energies_(std::move(energies)),
      transform_(std::move(transform)),
      labels_(std::move(labels)) {}

std::optional<int> LabeledBasis::find(BareLabel label) const {
  for (std::size_t k = 0; k < labels_.size(); ++k)
    if (labels_[k] && *labels_[k] == label) return static_cast<int>(k);
  return std::nullopt;
}

int LabeledBasis::index(BareLabel label) const {
  if (auto k = find(label)) return *k;
  throw NumericalError("hamiltonian", "no eigenstate carries the label " + to_string(label));
}

std::array<int, 4> LabeledBasis::computational() const {
  return {index({0, 0, 0}), index({0, 1, 0}), index({1, 0, 0}), index({1, 1, 0})};
}

CMatrix LabeledBasis::to_measurement(const CMatrix& bare_operator) const {
  return transform_.adjoint() * bare_operator * transform_;
}

LabeledBasis measurement_basis(const DeviceParams& params, double theta) {
  params.validate_at(theta);
  const OperatorMatrix h = build_full_hamiltonian(params, theta);
  HermitianEigen eig = eigendecompose_hermitian(h);
  const HilbertSpace& space = h.space();
  const int n = space.dimension();

  std::vector<std::optional<BareLabel>> labels(n);
  std::vector<int> claimed(n, -1);
  for (int k = 0; k < n; ++k) {
    Eigen::Index best = 0;
    eig.vectors.col(k).cwiseAbs2().maxCoeff(&best);
    // Largest-magnitude component real and positive.
    const Complex c = eig.vectors(best, k);
    eig.vectors.col(k) *= std::conj(c) / std::abs(c);
    if (std::norm(c) <= 0.5) continue;
    const auto occ = space.occupation(static_cast<int>(best));
    const BareLabel label{occ[0], occ[1], occ[2]};
    if (claimed[best] >= 0)
      throw NumericalError("hamiltonian", "eigenstates " + std::to_string(claimed[best]) +
                                              " and " + std::to_string(k) +
                                              " both claim " + to_string(label));
    claimed[best] = k;
    labels[k] = label;
  }
  LabeledBasis basis(space, theta, std::move(eig.values), std::move(eig.vectors),
                     std::move(labels));
  basis.computational();  // throws if a computational label is missing
  return basis;
}

OperatorMatrix interaction_hamiltonian(const DeviceParams& params, const LabeledBasis& basis,
                                       const FluxPulse& pulse, double t) {
  const int n = basis.dimension();
  const double f = bus_frequency(params, flux_at(pulse, t)) - bus_frequency(params, pulse.theta);
  if (envelope(pulse, t) == 0.0 || f == 0.0)
    return OperatorMatrix::hermitian(basis.space(), CMatrix::Zero(n, n), Unit::kAngularFrequency);
  const CMatrix number = basis.to_measurement(bus_number_operator());
  CVector phase(n);
  for (int k = 0; k < n; ++k) phase[k] = std::exp(kI * basis.energies()[k] * t);
  CMatrix h = f * phase.asDiagonal() * number * phase.conjugate().asDiagonal();
  return OperatorMatrix::hermitian(basis.space(), 0.5 * (h + h.adjoint()),
                                   Unit::kAngularFrequency);
}

EffectiveModel effective_model(const DeviceParams& params, double theta, double delta) {
  if (delta < 0.0) throw ConfigError("effective_model: delta must be non-negative");
  EffectiveModel m;
  m.dressed_frequencies = {dressed_frequency(params, 0, theta),
                           dressed_frequency(params, 1, theta)};
  m.bare_detuning = m.dressed_frequencies[0] - m.dressed_frequencies[1];
  m.large_amplitude = delta > 0.2;
  if (delta == 0.0) {
    m.detuning = m.bare_detuning;
    m.harmonic_detuning = m.bare_detuning;
    return m;
  }
  m.exchange_rate = 0.5 * delta * flux_derivative(params, theta, FluxQuantity::kExchangeCoupling, 1);
  m.second_harmonic =
      0.25 * delta * delta * flux_derivative(params, theta, FluxQuantity::kExchangeCoupling, 2);
  const auto shift = drive_induced_shift(params, theta, delta);
  m.detuning = m.bare_detuning + shift[0] - shift[1];

  constexpr int kSamples = 512;
  double c1 = 0.0;
  double mean_detuning = 0.0;
  try {
    for (int k = 0; k < kSamples; ++k) {
      const double x = 2.0 * std::numbers::pi * (k + 0.5) / kSamples;
      const double phi = theta + delta * std::cos(x);
      c1 += exchange_coupling(params, phi) * std::cos(x);
      mean_detuning += dressed_frequency(params, 0, phi) - dressed_frequency(params, 1, phi);
    }
    // J(t) = ... + c cos(w t) with c = (2/N) sum J cos; rotating-wave rate c/2.
    m.harmonic_exchange_rate = c1 / kSamples;
    m.harmonic_detuning = mean_detuning / kSamples;
  } catch (const NumericalError&) {
    m.harmonic_exchange_rate = NAN;
    m.harmonic_detuning = NAN;
  }
  return m;
}

}  // namespace tbus
