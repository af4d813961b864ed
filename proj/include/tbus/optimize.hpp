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

// Small derivative-free optimizers shared by the fitters and calibration.

#include <functional>
#include <optional>

#include "tbus/operators.hpp"

namespace tbus {

using ResidualFunction = std::function<RVector(const RVector&)>;
using ObjectiveFunction = std::function<double(const RVector&)>;

struct LeastSquaresOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-12;  // on the step and on the cost decrease
  double finite_difference_step = 1e-7;  // relative to max(|x|, 1)
  std::optional<RVector> lower;
  std::optional<RVector> upper;
};

struct LeastSquaresResult {
  RVector x;
  RMatrix covariance;  // s^2 (J^T J)^-1, s^2 = SSR / (n - p)
  RMatrix jacobian;
  double cost = 0.0;   // sum of squared residuals
  int iterations = 0;
  bool converged = false;
  bool rank_deficient = false;
};

/// Levenberg-Marquardt damped Gauss-Newton with a forward-difference
/// Jacobian. Bounds, when given, are enforced by clipping each trial step.
LeastSquaresResult levenberg_marquardt(const ResidualFunction& residuals,
                                       const RVector& x0,
                                       const LeastSquaresOptions& options = {});

struct NelderMeadOptions {
  int max_evaluations = 400;
  double x_tolerance = 1e-6;
  double f_tolerance = 1e-10;
};

struct NelderMeadResult {
  RVector x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Minimizes `objective` from `x0` with the initial simplex spanned by
/// `step` along each axis.
NelderMeadResult nelder_mead(const ObjectiveFunction& objective, const RVector& x0,
                             const RVector& step, const NelderMeadOptions& options = {});

}  // namespace tbus
