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

#include "tbus/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace tbus {

namespace {

RVector clip(const RVector& x, const LeastSquaresOptions& o) {
  RVector y = x;
  if (o.lower) y = y.cwiseMax(*o.lower);
  if (o.upper) y = y.cwiseMin(*o.upper);
  return y;
}

RMatrix forward_jacobian(const ResidualFunction& f, const RVector& x,
                         const RVector& fx, const LeastSquaresOptions& o) {
  RMatrix jac(fx.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    double h = o.finite_difference_step * std::max(std::abs(x[k]), 1.0);
    RVector xp = x;
    xp[k] += h;
    if (o.upper && xp[k] > (*o.upper)[k]) {
      xp[k] = x[k] - h;
      h = -h;
    }
    jac.col(k) = (f(xp) - fx) / h;
  }
  return jac;
}

}  // namespace

LeastSquaresResult levenberg_marquardt(const ResidualFunction& residuals,
                                       const RVector& x0,
                                       const LeastSquaresOptions& options) {
  LeastSquaresResult out;
  RVector x = clip(x0, options);
  RVector fx = residuals(x);
  double cost = fx.squaredNorm();
  double lambda = 1e-3;
  RMatrix jac;

  for (int it = 0; it < options.max_iterations; ++it) {
    out.iterations = it + 1;
    jac = forward_jacobian(residuals, x, fx, options);
    const RMatrix jtj = jac.transpose() * jac;
    const RVector grad = jac.transpose() * fx;
    bool accepted = false;
    bool tiny_step = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      RMatrix a = jtj;
      for (Eigen::Index k = 0; k < a.rows(); ++k)
        a(k, k) += lambda * std::max(jtj(k, k), 1e-300);
      const RVector step = a.ldlt().solve(-grad);
      const RVector trial = clip(x + step, options);
      const RVector ft = residuals(trial);
      const double ct = ft.allFinite() ? ft.squaredNorm() : INFINITY;
      if (ct < cost) {
        const double decrease = cost - ct;
        tiny_step = (trial - x).norm() <=
                        options.relative_tolerance * (x.norm() + options.relative_tolerance) ||
                    decrease <= options.relative_tolerance * cost;
        x = trial;
        fx = ft;
        cost = ct;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 4.0;
      if ((clip(x + step, options) - x).norm() <=
          options.relative_tolerance * (x.norm() + options.relative_tolerance)) {
        tiny_step = true;
        break;
      }
    }
    if (!accepted || tiny_step || cost == 0.0) {
      out.converged = true;
      break;
    }
  }

  jac = forward_jacobian(residuals, x, fx, options);
  const RMatrix jtj = jac.transpose() * jac;
  Eigen::FullPivLU<RMatrix> lu(jtj);
  lu.setThreshold(1e-12);
  out.rank_deficient = lu.rank() < jtj.rows();
  const auto n = static_cast<double>(fx.size());
  const auto p = static_cast<double>(x.size());
  const double s2 = n > p ? cost / (n - p) : 0.0;
  out.covariance = out.rank_deficient
                       ? RMatrix::Constant(jtj.rows(), jtj.cols(), INFINITY)
                       : RMatrix(s2 * jtj.inverse());
  out.x = x;
  out.cost = cost;
  out.jacobian = jac;
  return out;
}

NelderMeadResult nelder_mead(const ObjectiveFunction& objective, const RVector& x0,
                             const RVector& step, const NelderMeadOptions& options) {
  const Eigen::Index n = x0.size();
  std::vector<RVector> simplex(n + 1, x0);
  std::vector<double> values(n + 1);
  int evals = 0;
  auto eval = [&](const RVector& x) {
    ++evals;
    const double v = objective(x);
    return std::isfinite(v) ? v : INFINITY;
  };
  for (Eigen::Index k = 0; k < n; ++k) simplex[k + 1][k] += step[k];
  for (Eigen::Index k = 0; k <= n; ++k) values[k] = eval(simplex[k]);

  std::vector<std::size_t> order(n + 1);
  bool converged = false;
  while (evals < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    {
      std::vector<RVector> s2;
      std::vector<double> v2;
      for (auto i : order) {
        s2.push_back(simplex[i]);
        v2.push_back(values[i]);
      }
      simplex = std::move(s2);
      values = std::move(v2);
    }
    double spread = 0.0;
    for (Eigen::Index k = 1; k <= n; ++k)
      spread = std::max(spread, (simplex[k] - simplex[0]).cwiseAbs().maxCoeff());
    if (spread <= options.x_tolerance &&
        std::abs(values[n] - values[0]) <= options.f_tolerance) {
      converged = true;
      break;
    }

    RVector centroid = RVector::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k) centroid += simplex[k];
    centroid /= static_cast<double>(n);

    const RVector reflected = centroid + (centroid - simplex[n]);
    const double fr = eval(reflected);
    if (fr < values[0]) {
      const RVector expanded = centroid + 2.0 * (centroid - simplex[n]);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[n] = expanded;
        values[n] = fe;
      } else {
        simplex[n] = reflected;
        values[n] = fr;
      }
      continue;
    }
    if (fr < values[n - 1]) {
      simplex[n] = reflected;
      values[n] = fr;
      continue;
    }
    const bool outside = fr < values[n];
    const RVector contracted = outside ? RVector(centroid + 0.5 * (reflected - centroid))
                                       : RVector(centroid + 0.5 * (simplex[n] - centroid));
    const double fc = eval(contracted);
    if (fc < (outside ? fr : values[n])) {
      simplex[n] = contracted;
      values[n] = fc;
      continue;
    }
    for (Eigen::Index k = 1; k <= n; ++k) {
      simplex[k] = simplex[0] + 0.5 * (simplex[k] - simplex[0]);
      values[k] = eval(simplex[k]);
    }
  }
  const auto best = std::min_element(values.begin(), values.end()) - values.begin();
  return {simplex[best], values[best], evals, converged};
}

}  // namespace tbus
