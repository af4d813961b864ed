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

#include "tbus/pulses.hpp"

#include <algorithm>
#include <cmath>

#include "tbus/errors.hpp"

namespace tbus {

void FluxPulse::validate() const {
  if (!(delta >= 0.0)) throw ConfigError("pulse: delta must be non-negative");
  if (!(flat_duration >= 0.0)) throw ConfigError("pulse: flat duration must be non-negative");
  if (!(edge_sigma > 0.0)) throw ConfigError("pulse: edge sigma must be positive");
  if (!(edge_extent > 0.0)) throw ConfigError("pulse: edge extent must be positive");
  if (!(std::abs(theta) + delta < 0.5))
    throw ConfigError("pulse: |theta| + delta must stay below half a flux quantum");
  if (!std::isfinite(omega_phi) || !std::isfinite(phase))
    throw ConfigError("pulse: carrier frequency and phase must be finite");
}

FluxPulse FluxPulse::with_total_width(double width) const {
  FluxPulse p = *this;
  p.flat_duration = width - 2.0 * edge_duration();
  if (p.flat_duration < 0.0)
    throw ConfigError("pulse: width is shorter than the two edges");
  return p;
}

FluxPulse FluxPulse::with_phase(double new_phase) const {
  FluxPulse p = *this;
  p.phase = new_phase;
  return p;
}

double envelope(const FluxPulse& pulse, double t) {
  const double edge = pulse.edge_duration();
  const double total = pulse.total_duration();
  if (t <= 0.0 || t >= total) return 0.0;
  const double from_edge = std::min(t, total - t);
  if (from_edge >= edge) return 1.0;
  const double g0 = std::exp(-0.5 * pulse.edge_extent * pulse.edge_extent);
  const double u = (from_edge - edge) / pulse.edge_sigma;
  return (std::exp(-0.5 * u * u) - g0) / (1.0 - g0);
}

double flux_at(const FluxPulse& pulse, double t) {
  const double env = envelope(pulse, t);
  if (env == 0.0) return pulse.theta;
  return pulse.theta + pulse.delta * env * std::cos(pulse.omega_phi * t + pulse.phase);
}

}  // namespace tbus
