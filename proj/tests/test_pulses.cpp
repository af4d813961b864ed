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
#include <numbers>

#include "tbus/errors.hpp"
#include "tbus/pulses.hpp"
#include "tbus/units.hpp"

namespace tbus {
namespace {

FluxPulse sample_pulse() {
  FluxPulse p;
  p.theta = -0.108;
  p.delta = 0.153;
  p.omega_phi = units::mhz(851.0);
  p.flat_duration = 120e-9;
  return p;
}

TEST(Envelope, FlatTopIsOne) {
  const FluxPulse p = sample_pulse();
  EXPECT_DOUBLE_EQ(envelope(p, p.edge_duration() + p.flat_duration / 2), 1.0);
}

TEST(Envelope, RescaledEdgesStartAtZero) {
  const FluxPulse p = sample_pulse();
  EXPECT_EQ(envelope(p, 0.0), 0.0);
  EXPECT_EQ(envelope(p, p.total_duration()), 0.0);
  // Rescaling oracle (G - G0) / (1 - G0) in the middle of the rise.
  const double s = p.edge_sigma, t = 1.3 * s;
  const double g = std::exp(-std::pow(t - 3 * s, 2) / (2 * s * s));
  const double g0 = std::exp(-4.5);
  EXPECT_NEAR(envelope(p, t), (g - g0) / (1 - g0), 1e-12);
}

TEST(Envelope, MirrorSymmetric) {
  const FluxPulse p = sample_pulse();
  const double total = p.total_duration();
  for (int k = 0; k <= 40; ++k) {
    const double t = total * k / 40.0;
    EXPECT_NEAR(envelope(p, t), envelope(p, total - t), 1e-12);
  }
}

TEST(Envelope, BoundedAndZeroOutside) {
  const FluxPulse p = sample_pulse();
  EXPECT_EQ(envelope(p, -1e-9), 0.0);
  EXPECT_EQ(envelope(p, p.total_duration() + 1e-9), 0.0);
  for (int k = 0; k <= 400; ++k) {
    const double e = envelope(p, p.total_duration() * k / 400.0);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 1.0);
  }
}

TEST(FluxAt, StaticOutsidePulse) {
  const FluxPulse p = sample_pulse();
  EXPECT_DOUBLE_EQ(flux_at(p, -5e-9), p.theta);
}

TEST(FluxAt, CrestReachesFullAmplitude) {
  FluxPulse p = sample_pulse();
  const double period = 2 * std::numbers::pi / p.omega_phi;
  // First crest inside the flat top.
  const double t = std::ceil(p.edge_duration() / period) * period;
  EXPECT_NEAR(flux_at(p, t), p.theta + p.delta, 1e-9);
}

TEST(FluxAt, PhaseFlipMirrorsExcursion) {
  const FluxPulse p = sample_pulse();
  const FluxPulse q = p.with_phase(std::numbers::pi);
  for (int k = 0; k < 50; ++k) {
    const double t = p.edge_duration() + p.flat_duration * k / 50.0;
    EXPECT_NEAR(flux_at(q, t), p.theta - (flux_at(p, t) - p.theta), 1e-12);
  }
}

TEST(FluxAt, ExcursionBounded) {
  const FluxPulse p = sample_pulse();
  for (int k = 0; k <= 2000; ++k) {
    const double t = p.total_duration() * k / 2000.0;
    EXPECT_LE(std::abs(flux_at(p, t)), std::abs(p.theta) + p.delta + 1e-15);
  }
}

TEST(FluxPulse, WidthConvention) {
  const FluxPulse p = sample_pulse().with_total_width(183e-9);
  EXPECT_NEAR(p.total_duration(), 183e-9, 1e-18);
  EXPECT_NEAR(p.flat_duration, 183e-9 - 2 * 3 * 8.3e-9, 1e-18);
  EXPECT_THROW(sample_pulse().with_total_width(40e-9), ConfigError);
}

TEST(FluxPulse, Validation) {
  FluxPulse p = sample_pulse();
  p.delta = 0.45;
  EXPECT_THROW(p.validate(), ConfigError);
  p = sample_pulse();
  p.edge_sigma = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_NO_THROW(sample_pulse().validate());
}

}  // namespace
}  // namespace tbus
