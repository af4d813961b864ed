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

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "tbus/device.hpp"
#include "tbus/errors.hpp"
#include "tbus/operators.hpp"
#include "tbus/units.hpp"

namespace tbus {
namespace {

using units::ghz;
using units::khz;
using units::mhz;
constexpr double kPi = std::numbers::pi;

const DeviceParams kRef = DeviceParams::reference_device();

// Derivative of the quartic through five equally spaced samples.
double polynomial_derivative(const std::function<double(double)>& f, double x, double h,
                             int order) {
  RMatrix a(5, 5);
  RVector b(5);
  for (int i = 0; i < 5; ++i) {
    const double s = (i - 2) * h;
    for (int k = 0; k < 5; ++k) a(i, k) = std::pow(s, k);
    b[i] = f(x + s);
  }
  const RVector c = a.colPivHouseholderQr().solve(b);
  return order == 1 ? c[1] : 2.0 * c[2];
}

TEST(BusFrequency, ZeroFluxAndHalfQuantum) {
  EXPECT_DOUBLE_EQ(bus_frequency(kRef, 0.0), ghz(7.445));
  // cos(pi/2) is not exactly zero in floating point.
  EXPECT_NEAR(bus_frequency(kRef, 0.5), 0.0, 1e-6 * ghz(7.445));
}

TEST(BusFrequency, DirectEvaluationAtBias) {
  const double expected = ghz(7.445) * std::sqrt(std::cos(kPi * 0.108));
  EXPECT_NEAR(bus_frequency(kRef, -0.108), expected, 1e-6 * expected);
  EXPECT_NEAR(units::to_ghz(expected), 7.23, 0.01);
}

TEST(BusFrequency, EvenAndPeriodic) {
  for (double phi : {0.03, 0.17, 0.31, 0.44}) {
    EXPECT_NEAR(bus_frequency(kRef, phi), bus_frequency(kRef, -phi), 1e-3);
    EXPECT_NEAR(bus_frequency(kRef, phi), bus_frequency(kRef, phi + 1.0), 1e-2);
  }
}

TEST(DressedFrequency, DecoupledLimit) {
  DeviceParams p = kRef;
  p.g_q = {0.0, 0.0};
  EXPECT_DOUBLE_EQ(dressed_frequency(p, 0, -0.108), p.omega_q[0]);
  EXPECT_DOUBLE_EQ(dressed_frequency(p, 1, -0.108), p.omega_q[1]);
}

TEST(DressedFrequency, MonotoneInCouplingSquared) {
  DeviceParams p = kRef;
  double last = dressed_frequency(p, 0, -0.108);
  for (double s : {1.2, 1.4, 1.6}) {
    p.g_q[0] = kRef.g_q[0] * s;
    const double now = dressed_frequency(p, 0, -0.108);
    EXPECT_LT(now, last);  // qubit below the bus is pushed down
    last = now;
  }
}

TEST(DressedFrequency, QubitDetuningNearPublishedValue) {
  const double d = dressed_frequency(kRef, 0, kReferenceBias) - dressed_frequency(kRef, 1, kReferenceBias);
  EXPECT_NEAR(units::to_mhz(d), 854.0, 5.0);
}

TEST(DressedFrequency, ChainRuleOracle) {
  for (double phi : {-0.2, -0.108, 0.15}) {
    for (int q = 0; q < 2; ++q) {
      const double delta = kRef.omega_q[q] - bus_frequency(kRef, phi);
      const double dbus = kRef.omega_tb0 * 0.5 / std::sqrt(std::cos(kPi * phi)) *
                          (-kPi * std::sin(kPi * phi));
      const double analytic = kRef.g_q[q] * kRef.g_q[q] / (delta * delta) * dbus;
      const auto quantity = q == 0 ? FluxQuantity::kDressedFrequency1 : FluxQuantity::kDressedFrequency2;
      const double numeric = flux_derivative(kRef, phi, quantity, 1);
      EXPECT_NEAR(numeric, analytic, 1e-6 * std::abs(analytic)) << phi << " q" << q;
    }
  }
}

TEST(ExchangeCoupling, SymmetricReduction) {
  DeviceParams p = kRef;
  p.omega_q = {ghz(5.5), ghz(5.5)};
  const double delta = p.omega_q[0] - bus_frequency(p, -0.108);
  EXPECT_NEAR(exchange_coupling(p, -0.108), p.g_q[0] * p.g_q[1] / delta, 1e-9 * mhz(1));
}

TEST(ExchangeCoupling, SignFlipsAcrossTheBus) {
  DeviceParams below = kRef, above = kRef;
  above.omega_q = {ghz(8.2), ghz(8.0)};
  EXPECT_LT(exchange_coupling(below, -0.108), 0.0);
  EXPECT_GT(exchange_coupling(above, -0.108), 0.0);
}

TEST(ExchangeCoupling, DirectEvaluationAnchor) {
  const double d1 = kRef.omega_q[0] - bus_frequency(kRef, -0.108);
  const double d2 = kRef.omega_q[1] - bus_frequency(kRef, -0.108);
  const double j = 0.5 * kRef.g_q[0] * kRef.g_q[1] * (1 / d1 + 1 / d2);
  EXPECT_NEAR(exchange_coupling(kRef, -0.108), j, 1e-9 * std::abs(j));
  EXPECT_NEAR(units::to_mhz(j), -4.29, 0.05);
}

TEST(FluxDerivative, SlopeIsOddAboutZeroFlux) {
  const double plus = flux_derivative(kRef, 0.108, FluxQuantity::kDressedFrequency1, 1);
  const double minus = flux_derivative(kRef, -0.108, FluxQuantity::kDressedFrequency1, 1);
  EXPECT_LT(plus, 0.0);  // bus moves down towards the qubit
  EXPECT_NEAR(minus, -plus, 1e-6 * std::abs(plus));
  const double small = flux_derivative(kRef, 1e-3, FluxQuantity::kDressedFrequency1, 1);
  EXPECT_LT(std::abs(small), 0.05 * std::abs(plus));
  EXPECT_NE(small, 0.0);
}

TEST(FluxDerivative, MatchesPolynomialFit) {
  for (auto q : {FluxQuantity::kDressedFrequency1, FluxQuantity::kDressedFrequency2,
                 FluxQuantity::kExchangeCoupling}) {
    for (int order : {1, 2}) {
      const std::function<double(double)> f = [&](double x) {
        switch (q) {
          case FluxQuantity::kDressedFrequency1: return dressed_frequency(kRef, 0, x);
          case FluxQuantity::kDressedFrequency2: return dressed_frequency(kRef, 1, x);
          default: return exchange_coupling(kRef, x);
        }
      };
      const double oracle = polynomial_derivative(f, -0.108, 1e-3, order);
      const double value = flux_derivative(kRef, -0.108, q, order);
      EXPECT_NEAR(value, oracle, 1e-5 * std::abs(oracle)) << order;
    }
  }
}

TEST(FluxDerivative, RejectsCuspAndZero) {
  EXPECT_THROW(flux_derivative(kRef, 0.0, FluxQuantity::kExchangeCoupling, 1), ConfigError);
  EXPECT_THROW(flux_derivative(kRef, 0.499, FluxQuantity::kExchangeCoupling, 1), ConfigError);
  EXPECT_THROW(flux_derivative(kRef, 0.1, FluxQuantity::kExchangeCoupling, 3), ConfigError);
}

TEST(DriveShift, ZeroAndQuadraticScaling) {
  const auto zero = drive_induced_shift(kRef, -0.108, 0.0);
  EXPECT_EQ(zero[0], 0.0);
  EXPECT_EQ(zero[1], 0.0);
  const auto a = drive_induced_shift(kRef, -0.108, 0.05);
  const auto b = drive_induced_shift(kRef, -0.108, 0.10);
  for (int q = 0; q < 2; ++q) EXPECT_NEAR(b[q] / a[q], 4.0, 1e-3);
}

TEST(DriveShift, LowersQubitDetuningBySeveralMegahertz) {
  const auto s = drive_induced_shift(kRef, -0.108, 0.153);
  const double change = units::to_mhz(s[0] - s[1]);
  EXPECT_LT(change, 0.0);
  EXPECT_NEAR(change, -3.0, 1.5);
}

TEST(StaticZZ, VanishesWithoutCoupling) {
  DeviceParams p = kRef;
  p.g_q = {units::khz(1), units::khz(1)};
  EXPECT_LT(std::abs(static_zz(p, -0.108)), units::kTwoPi * 1.0);
}

TEST(StaticZZ, PublishedMagnitude) {
  const double zz = std::abs(units::to_khz(static_zz(kRef, kReferenceBias)));
  EXPECT_GT(zz, 33.0);
  EXPECT_LT(zz, 99.0);
}

TEST(StaticZZ, PerturbativeOracleAtWeakCoupling) {
  DeviceParams p = kRef;
  p.g_q = {0.3 * kRef.g_q[0], 0.3 * kRef.g_q[1]};
  const double j = exchange_coupling(p, -0.108);
  const double d = dressed_frequency(p, 0, -0.108) - dressed_frequency(p, 1, -0.108);
  const double oracle = 2 * j * j * (1 / (d - p.alpha_q[1]) - 1 / (d + p.alpha_q[0]));
  EXPECT_NEAR(static_zz(p, -0.108), oracle, 0.3 * std::abs(oracle));
}

TEST(DeviceParams, ValidationErrors) {
  DeviceParams p = kRef;
  p.t2 = {3.0 * p.t1[0], p.t2[1]};
  EXPECT_THROW(p.validate(), ConfigError);
  p = kRef;
  p.g_q[0] = mhz(600);
  EXPECT_THROW(p.validate_at(-0.108), ConfigError);
  EXPECT_NO_THROW(kRef.validate_at(-0.108));
}

SpectroscopyData synthetic(const DeviceParams& p, double noise, std::mt19937_64* rng) {
  std::normal_distribution<double> n(0.0, khz(noise));
  auto jitter = [&] { return rng ? n(*rng) : 0.0; };
  SpectroscopyData d;
  // The qubit sweep must cover enough of the bus tuning range for g and the
  // bare frequency to decorrelate; +-0.2 leaves g uncertain at 10% level.
  for (int i = 0; i <= 16; ++i) {
    const double b = -0.4 + 0.05 * i, q = -0.35 + 0.04375 * i;
    d.bus.emplace_back(b, bus_frequency(p, b) + jitter());
    d.qubit1.emplace_back(q, dressed_frequency(p, 0, q) + jitter());
    d.qubit2.emplace_back(q, dressed_frequency(p, 1, q) + jitter());
  }
  return d;
}

void expect_close(const DeviceParams& fit, const DeviceParams& truth, double rel) {
  for (int q = 0; q < 2; ++q) {
    EXPECT_NEAR(fit.omega_q[q], truth.omega_q[q], rel * truth.omega_q[q]);
    EXPECT_NEAR(fit.g_q[q], truth.g_q[q], rel * truth.g_q[q]);
  }
  EXPECT_NEAR(fit.omega_tb0, truth.omega_tb0, rel * truth.omega_tb0);
}

TEST(FitDevice, NoiselessRoundTrip) {
  const DeviceFit f = fit_device_params(synthetic(kRef, 0.0, nullptr));
  expect_close(f.params, kRef, 1e-3);
  EXPECT_LT(f.residual_rms, khz(1));
}

TEST(FitDevice, NoisyRecoveryOverDraws) {
  std::mt19937_64 rng(2024);
  for (int draw = 0; draw < 50; ++draw) {
    const DeviceFit f = fit_device_params(synthetic(kRef, 100.0, &rng));
    expect_close(f.params, kRef, 1e-2);
  }
}

TEST(FitDevice, SingleFluxPointIsRankDeficient) {
  SpectroscopyData d = synthetic(kRef, 0.0, nullptr);
  for (auto& pt : d.qubit1) pt = {0.1, dressed_frequency(kRef, 0, 0.1)};
  EXPECT_THROW(fit_device_params(d), NumericalError);
}

}  // namespace
}  // namespace tbus
