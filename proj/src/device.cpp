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

#include "tbus/device.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "tbus/errors.hpp"
#include "tbus/hamiltonian.hpp"
#include "tbus/optimize.hpp"
#include "tbus/units.hpp"

namespace tbus {

void DeviceParams::validate() const {
  for (int i = 0; i < 2; ++i) {
    const std::string q = "qubit " + std::to_string(i + 1);
    if (!(omega_q[i] > 0.0)) throw ConfigError(q + ": frequency must be positive");
    if (!(g_q[i] > 0.0)) throw ConfigError(q + ": coupling must be positive");
    if (!std::isfinite(alpha_q[i])) throw ConfigError(q + ": anharmonicity must be finite");
    if (!(t1[i] > 0.0) || !(t2[i] > 0.0)) throw ConfigError(q + ": T1 and T2 must be positive");
    if (t2[i] > 2.0 * t1[i] * (1.0 + 1e-12)) throw ConfigError(q + ": T2 exceeds 2 T1");
  }
  if (!(omega_tb0 > 0.0)) throw ConfigError("bus: frequency must be positive");
  if (!std::isfinite(alpha_tb)) throw ConfigError("bus: anharmonicity must be finite");
}

void DeviceParams::validate_at(double theta) const {
  validate();
  if (!(std::abs(theta) < 0.5)) throw ConfigError("flux bias must satisfy |theta| < 0.5");
  for (int i = 0; i < 2; ++i) {
    const double ratio = std::abs(g_q[i] / qubit_bus_detuning(*this, i, theta));
    if (!(ratio < kDispersiveGuard))
      throw ConfigError("qubit " + std::to_string(i + 1) +
                        ": |g/Delta| = " + std::to_string(ratio) +
                        " violates the dispersive guard at theta = " + std::to_string(theta));
  }
}

DeviceParams DeviceParams::reference_device() {
  using namespace units;
  DeviceParams p;
  p.omega_q = {ghz(5.8899), ghz(5.0311)};
  p.alpha_q = {mhz(-324.0), mhz(-235.0)};
  p.g_q = {mhz(100.0), mhz(71.4)};
  p.omega_tb0 = ghz(7.445);
  p.alpha_tb = mhz(-300.0);
  p.t1 = {us(26.3), us(50.0)};
  p.t2 = {us(12.1), us(28.0)};
  return p;
}

double bus_frequency(const DeviceParams& p, double flux) {
  return p.omega_tb0 * std::sqrt(std::abs(std::cos(std::numbers::pi * flux)));
}

double qubit_bus_detuning(const DeviceParams& p, int qubit, double flux) {
  return p.omega_q.at(qubit) - bus_frequency(p, flux);
}

double dressed_frequency(const DeviceParams& p, int qubit, double flux) {
  const double delta = qubit_bus_detuning(p, qubit, flux);
  if (delta == 0.0 || std::abs(delta) < 1e-9 * p.omega_q[qubit])
    throw NumericalError("device", "qubit " + std::to_string(qubit + 1) +
                                       " is resonant with the bus; dispersive model invalid");
  return p.omega_q[qubit] + p.g_q[qubit] * p.g_q[qubit] / delta;
}

double exchange_coupling(const DeviceParams& p, double flux) {
  const double d1 = qubit_bus_detuning(p, 0, flux);
  const double d2 = qubit_bus_detuning(p, 1, flux);
  if (std::abs(d1) < 1e-9 * p.omega_q[0] || std::abs(d2) < 1e-9 * p.omega_q[1])
    throw NumericalError("device", "qubit resonant with the bus; exchange coupling undefined");
  return 0.5 * p.g_q[0] * p.g_q[1] * (1.0 / d1 + 1.0 / d2);
}

namespace {

double richardson(const std::function<double(double)>& f, double x, int order, double h0) {
  constexpr int kLevels = 5;
  double table[kLevels][kLevels];
  double h = h0;
  for (int k = 0; k < kLevels; ++k, h *= 0.5) {
    table[k][0] = order == 1 ? (f(x + h) - f(x - h)) / (2.0 * h)
                             : (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    double factor = 1.0;
    for (int j = 1; j <= k; ++j) {
      factor *= 4.0;
      table[k][j] = table[k][j - 1] + (table[k][j - 1] - table[k - 1][j - 1]) / (factor - 1.0);
    }
  }
  return table[kLevels - 1][kLevels - 1];
}

}  // namespace

double flux_derivative(const DeviceParams& p, double flux, FluxQuantity quantity,
                       int order) {
  if (order != 1 && order != 2) throw ConfigError("flux_derivative: order must be 1 or 2");
  if (std::abs(flux) < 1e-12)
    throw ConfigError("flux_derivative: evaluation at zero flux is not supported");
  const double reduced = flux - std::round(flux);  // bus curve has period 1
  const double to_cusp = 0.5 - std::abs(reduced);
  if (to_cusp < 4e-3)
    throw ConfigError("flux_derivative: stencil would cross the half-flux-quantum cusp");
  const double h0 = std::min(0.01, to_cusp / 4.0);

  std::function<double(double)> f;
  switch (quantity) {
    case FluxQuantity::kDressedFrequency1:
      f = [&p](double x) { return dressed_frequency(p, 0, x); };
      break;
    case FluxQuantity::kDressedFrequency2:
      f = [&p](double x) { return dressed_frequency(p, 1, x); };
      break;
    case FluxQuantity::kExchangeCoupling:
      f = [&p](double x) { return exchange_coupling(p, x); };
      break;
  }
  return richardson(f, flux, order, h0);
}

std::array<double, 2> drive_induced_shift(const DeviceParams& p, double flux,
                                          double delta) {
  if (delta < 0.0) throw ConfigError("drive_induced_shift: delta must be non-negative");
  if (delta == 0.0) return {0.0, 0.0};
  const double c = 0.25 * delta * delta;
  return {c * flux_derivative(p, flux, FluxQuantity::kDressedFrequency1, 2),
          c * flux_derivative(p, flux, FluxQuantity::kDressedFrequency2, 2)};
}

double static_zz(const DeviceParams& p, double flux) {
  const LabeledBasis basis = measurement_basis(p, flux);
  const auto& e = basis.energies();
  return e[basis.index({1, 1, 0})] - e[basis.index({1, 0, 0})] -
         e[basis.index({0, 1, 0})] + e[basis.index({0, 0, 0})];
}

namespace {

void check_curve(const std::vector<std::pair<double, double>>& curve, const char* name) {
  if (curve.empty()) throw ConfigError(std::string("fit_device_params: no ") + name + " data");
  auto [lo, hi] = std::minmax_element(curve.begin(), curve.end(),
                                      [](auto& a, auto& b) { return a.first < b.first; });
  if (hi->first - lo->first == 0.0)
    throw NumericalError("device", std::string("rank-deficient spectroscopy: all ") + name +
                                       " points share one flux value");
  if (curve.size() < 4)
    throw ConfigError(std::string("fit_device_params: need at least 4 ") + name + " points");
  if (hi->first - lo->first < 0.1)
    throw ConfigError(std::string("fit_device_params: ") + name +
                      " points must span at least 0.1 flux quanta");
}

}  // namespace

DeviceFit fit_device_params(const SpectroscopyData& data, const DeviceParams& defaults) {
  check_curve(data.bus, "bus");
  check_curve(data.qubit1, "qubit-1");
  check_curve(data.qubit2, "qubit-2");

  // Work in GHz (ordinary frequency) to keep the normal equations well scaled.
  constexpr double kScale = units::kTwoPi * 1e9;
  const auto model = [&](const RVector& x) {
    DeviceParams p = defaults;
    p.omega_q = {x[0] * kScale, x[1] * kScale};
    p.g_q = {x[2] * kScale, x[3] * kScale};
    p.omega_tb0 = x[4] * kScale;
    return p;
  };
  const std::size_t n = data.bus.size() + data.qubit1.size() + data.qubit2.size();
  const auto residuals = [&](const RVector& x) {
    RVector r(n);
    const DeviceParams p = model(x);
    std::size_t k = 0;
    for (auto [phi, w] : data.bus) r[k++] = (bus_frequency(p, phi) - w) / kScale;
    for (int q = 0; q < 2; ++q) {
      for (auto [phi, w] : q == 0 ? data.qubit1 : data.qubit2) {
        const double delta = qubit_bus_detuning(p, q, phi);
        r[k++] = std::abs(delta) < 1e-6 * kScale
                     ? NAN
                     : (p.omega_q[q] + p.g_q[q] * p.g_q[q] / delta - w) / kScale;
      }
    }
    return r;
  };

  RVector x0(5);
  double bus_max = 0.0;
  for (auto [phi, w] : data.bus) bus_max = std::max(bus_max, w);
  x0[4] = bus_max / kScale;
  DeviceParams guess = defaults;
  guess.omega_tb0 = bus_max;
  for (int q = 0; q < 2; ++q) {
    const auto& curve = q == 0 ? data.qubit1 : data.qubit2;
    double mean = 0.0;
    for (auto [phi, w] : curve) mean += w;
    mean /= static_cast<double>(curve.size());
    x0[q] = mean / kScale;
    guess.omega_q[q] = mean;
    auto [lo, hi] = std::minmax_element(curve.begin(), curve.end(),
                                        [](auto& a, auto& b) { return a.second < b.second; });
    const double spread = hi->second - lo->second;
    const double inv = std::abs(1.0 / qubit_bus_detuning(guess, q, hi->first) -
                                1.0 / qubit_bus_detuning(guess, q, lo->first));
    const double g = inv > 0.0 ? std::sqrt(spread / inv) : 0.01 * mean;
    x0[2 + q] = std::max(g, 1e-4 * mean) / kScale;
  }

  LeastSquaresOptions options;
  options.max_iterations = 500;
  options.relative_tolerance = 1e-14;
  options.lower = RVector::Constant(5, 1e-6);
  const LeastSquaresResult fit = levenberg_marquardt(residuals, x0, options);
  if (fit.rank_deficient)
    throw NumericalError("device", "rank-deficient spectroscopy data");
  if (!fit.converged)
    throw NumericalError("device", "device fit did not converge");

  DeviceFit out;
  out.params = model(fit.x);
  for (int k = 0; k < 5; ++k) out.uncertainty[k] = std::sqrt(fit.covariance(k, k)) * kScale;
  out.residual_rms = std::sqrt(fit.cost / static_cast<double>(n)) * kScale;
  out.iterations = fit.iterations;
  return out;
}

}  // namespace tbus
