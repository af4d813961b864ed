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

// Parametric flux drive Phi(t) = Theta + delta * env(t) * cos(w t + phase).
// Time is measured from the start of the envelope.

namespace tbus {

struct FluxPulse {
  double theta = 0.0;          // DC bias, flux quanta
  double delta = 0.0;          // modulation amplitude, flux quanta
  double omega_phi = 0.0;      // carrier angular frequency, rad/s
  double phase = 0.0;          // carrier phase, rad
  double flat_duration = 0.0;  // s
  double edge_sigma = 8.3e-9;  // s
  double edge_extent = 3.0;    // edge length in units of sigma

  void validate() const;

  double edge_duration() const { return edge_extent * edge_sigma; }
  double total_duration() const { return flat_duration + 2.0 * edge_duration(); }

  /// Same pulse with the flat part adjusted so the total width (edges
  /// included) equals `width`.
  FluxPulse with_total_width(double width) const;
  FluxPulse with_phase(double new_phase) const;
};

/// Gaussian rise over [0, extent*sigma], rescaled to run exactly from 0 to 1,
/// a flat top, and the mirrored fall. Zero outside the pulse.
double envelope(const FluxPulse& pulse, double t);

double flux_at(const FluxPulse& pulse, double t);

}  // namespace tbus
