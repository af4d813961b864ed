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

#include "tbus/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "tbus/errors.hpp"
#include "tbus/optimize.hpp"
#include "tbus/parallel.hpp"

namespace tbus {

// ---------------------------------------------------------------------------
// Lindblad rates

LindbladSpec LindbladSpec::from_device(const DeviceParams& params) {
  params.validate();
  LindbladSpec s;
  for (int q = 0; q < 2; ++q) {
    s.relaxation[q] = 1.0 / params.t1[q];
    s.dephasing[q] = std::max(0.0, 1.0 / params.t2[q] - 0.5 / params.t1[q]);
  }
  return s;
}

void LindbladSpec::validate() const {
  for (int q = 0; q < 2; ++q)
    if (!(relaxation[q] >= 0.0) || !(dephasing[q] >= 0.0) || !std::isfinite(relaxation[q]) ||
        !std::isfinite(dephasing[q]))
      throw ConfigError("lindblad: rates must be finite and non-negative");
}

bool LindbladSpec::is_zero() const {
  return relaxation[0] == 0.0 && relaxation[1] == 0.0 && dephasing[0] == 0.0 &&
         dephasing[1] == 0.0;
}

// ---------------------------------------------------------------------------
// Propagator

struct Propagator::Validation {
  std::once_flag once;
  double refinement = 1.0;
};

namespace {

LabeledBasis checked_basis(const DeviceParams& params, LabeledBasis basis) {
  params.validate_at(basis.theta());
  if (basis.dimension() != device_space().dimension())
    throw ConfigError("propagator: basis does not match the device space");
  return basis;
}

// Multiplies row j of x = [Re | Im] by c_j + i s_j.
void rotate_rows(RMatrix& x, const RVector& c, const RVector& s) {
  const Eigen::Index n = x.cols() / 2;
  for (Eigen::Index m = 0; m < n; ++m) {
    auto re = x.col(m);
    auto im = x.col(m + n);
    for (Eigen::Index j = 0; j < x.rows(); ++j) {
      const double r = re[j];
      const double i = im[j];
      re[j] = c[j] * r - s[j] * i;
      im[j] = s[j] * r + c[j] * i;
    }
  }
}

RMatrix split(const CMatrix& z) {
  RMatrix x(z.rows(), 2 * z.cols());
  x.leftCols(z.cols()) = z.real();
  x.rightCols(z.cols()) = z.imag();
  return x;
}

CMatrix join(const RMatrix& x) {
  const Eigen::Index n = x.cols() / 2;
  CMatrix z(x.rows(), n);
  z.real() = x.leftCols(n);
  z.imag() = x.rightCols(n);
  return z;
}

double worst_infidelity(const CMatrix& a, const CMatrix& b) {
  double worst = 0.0;
  for (Eigen::Index m = 0; m < a.cols(); ++m) {
    const double overlap = std::norm(a.col(m).dot(b.col(m)));
    const double norms = a.col(m).squaredNorm() * b.col(m).squaredNorm();
    if (norms == 0.0) continue;
    worst = std::max(worst, 1.0 - overlap / norms);
  }
  return worst;
}

}  // namespace

Propagator::Propagator(DeviceParams params, LabeledBasis basis, StepOptions options)
    : params_(std::move(params)),
      basis_(checked_basis(params_, std::move(basis))),
      options_(options),
      validation_(std::make_shared<Validation>()) {
  if (options_.dt < 0.0 || !(options_.steps_per_period > 0.0) ||
      !(options_.dissipation_step > 0.0) || !(options_.idle_dissipation_step > 0.0))
    throw ConfigError("propagator: step options must be positive");
  const CMatrix& u = basis_.transform();
  if (u.imag().cwiseAbs().maxCoeff() > 1e-9)
    throw NumericalError("dynamics", "measurement basis is not real");
  v_ = u.real();
  vt_ = v_.transpose();
  energies_ = basis_.energies().array() - basis_.energies()[0];
  const HilbertSpace space = device_space();
  bus_occupation_.resize(space.dimension());
  const std::size_t tb = space.position("TB");
  for (int j = 0; j < space.dimension(); ++j) bus_occupation_[j] = space.occupation(j)[tb];
  omega_tb_static_ = bus_frequency(params_, basis_.theta());
}

Propagator::Propagator(const DeviceParams& params, double theta, StepOptions options)
    : Propagator(params, measurement_basis(params, theta), options) {}

double Propagator::raw_step(const FluxPulse& pulse) const {
  if (options_.dt > 0.0) return options_.dt / validation_->refinement;
  constexpr double kFloorFrequency = 5e8;  // Hz, when the carrier is slow or absent
  const double f = std::max(std::abs(pulse.omega_phi) / (2.0 * std::numbers::pi), kFloorFrequency);
  return 1.0 / (options_.steps_per_period * f * validation_->refinement);
}

double Propagator::time_step(const FluxPulse& pulse) const {
  const double total = pulse.total_duration();
  if (total <= 0.0) return 0.0;
  const double n = std::max(1.0, std::ceil(total / raw_step(pulse) - 1e-9));
  return total / n;
}

CVector Propagator::free_phases(double t) const {
  CVector p(energies_.size());
  for (Eigen::Index j = 0; j < energies_.size(); ++j) p[j] = std::exp(-kI * energies_[j] * t);
  return p;
}

void Propagator::advance(const FluxPulse& pulse, double dt, long k_begin, long k_end,
                         RMatrix& x) const {
  if (k_end <= k_begin) return;
  const Eigen::Index n = energies_.size();
  RVector c_half(n), s_half(n), c_full(n), s_full(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    c_half[j] = std::cos(0.5 * energies_[j] * dt);
    s_half[j] = -std::sin(0.5 * energies_[j] * dt);
    c_full[j] = std::cos(energies_[j] * dt);
    s_full[j] = -std::sin(energies_[j] * dt);
  }
  RVector c_bus(n), s_bus(n);
  RMatrix y(x.rows(), x.cols());
  rotate_rows(x, c_half, s_half);
  for (long k = k_begin; k < k_end; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * dt;
    if (envelope(pulse, t) != 0.0) {
      const double f = bus_frequency(params_, flux_at(pulse, t)) - omega_tb_static_;
      if (f != 0.0) {
        const double c1 = std::cos(f * dt), s1 = -std::sin(f * dt);
        const double c2 = c1 * c1 - s1 * s1, s2 = 2.0 * c1 * s1;
        for (Eigen::Index j = 0; j < n; ++j) {
          switch (bus_occupation_[j]) {
            case 0: c_bus[j] = 1.0; s_bus[j] = 0.0; break;
            case 1: c_bus[j] = c1; s_bus[j] = s1; break;
            default: c_bus[j] = c2; s_bus[j] = s2; break;
          }
        }
        y.noalias() = v_ * x;
        rotate_rows(y, c_bus, s_bus);
        x.noalias() = vt_ * y;
      }
    }
    if (k + 1 < k_end)
      rotate_rows(x, c_full, s_full);
    else
      rotate_rows(x, c_half, s_half);
  }
}

CMatrix Propagator::evolve_with_step(const FluxPulse& pulse, const CMatrix& initial,
                                     double dt) const {
  const double total = pulse.total_duration();
  const long steps = std::max(1L, std::lround(total / dt));
  RMatrix x = split(initial);
  advance(pulse, total / static_cast<double>(steps), 0, steps, x);
  CMatrix out = join(x);
  return free_phases(total).conjugate().asDiagonal() * out;
}

void Propagator::ensure_validated(const FluxPulse& pulse, const CMatrix& probe) const {
  if (!options_.validate) return;
  std::call_once(validation_->once, [&] {
    const CMatrix columns = probe.leftCols(std::min<Eigen::Index>(probe.cols(), 4));
    constexpr int kMaxRefinements = 4;
    for (int attempt = 0; attempt <= kMaxRefinements; ++attempt) {
      const double dt = time_step(pulse);
      const double change = worst_infidelity(evolve_with_step(pulse, columns, dt),
                                             evolve_with_step(pulse, columns, 0.5 * dt));
      if (change < options_.validation_tolerance) return;
      if (options_.dt > 0.0)
        throw NumericalError("dynamics", "time step " + std::to_string(dt) +
                                             " s is too coarse: halving it changes the "
                                             "final state by " + std::to_string(change));
      validation_->refinement *= 2.0;
    }
    throw NumericalError("dynamics", "time step failed to converge after refinement");
  });
}

CMatrix Propagator::evolve(const FluxPulse& pulse, const CMatrix& initial) const {
  pulse.validate();
  if (initial.rows() != dimension())
    throw ConfigError("propagator: initial states must have dimension " +
                      std::to_string(dimension()));
  if (pulse.delta == 0.0 || pulse.total_duration() == 0.0) return initial;
  ensure_validated(pulse, initial);
  return evolve_with_step(pulse, initial, time_step(pulse));
}

CVector Propagator::evolve(const FluxPulse& pulse, const CVector& initial) const {
  return evolve(pulse, CMatrix(initial)).col(0);
}

CMatrix Propagator::unitary(const FluxPulse& pulse) const {
  return evolve(pulse, CMatrix(CMatrix::Identity(dimension(), dimension())));
}

std::vector<Propagator::Segment> Propagator::segments(const FluxPulse& pulse,
                                                      double segment) const {
  pulse.validate();
  if (!(segment > 0.0)) throw ConfigError("propagator: segment length must be positive");
  const double total = pulse.total_duration();
  std::vector<Segment> out;
  if (total == 0.0) return out;
  if (pulse.delta == 0.0) {
    const long count = std::max(1L, static_cast<long>(std::ceil(total / segment - 1e-9)));
    out.assign(count, Segment{total / static_cast<double>(count), true, {}});
    return out;
  }
  const int n = dimension();
  CMatrix probe = CMatrix::Zero(n, 4);
  const auto comp = basis_.computational();
  for (int m = 0; m < 4; ++m) probe(comp[m], m) = 1.0;
  ensure_validated(pulse, probe);
  const double dt = time_step(pulse);
  const long steps = std::lround(total / dt);
  const long per_segment = std::max(1L, std::lround(segment / dt));
  for (long k = 0; k < steps; k += per_segment) {
    const long k_end = std::min(steps, k + per_segment);
    RMatrix x = RMatrix::Zero(n, 2 * n);
    x.leftCols(n).setIdentity();
    advance(pulse, dt, k, k_end, x);
    out.push_back(Segment{static_cast<double>(k_end - k) * dt, false, join(x)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Observables

namespace {

struct Populations {
  std::array<double, 4> computational{};
  double leakage = 0.0;
};

Populations populations_of(const LabeledBasis& basis, const RVector& diagonal) {
  Populations p;
  const auto comp = basis.computational();
  double sum = 0.0;
  for (int m = 0; m < 4; ++m) {
    p.computational[m] = std::clamp(diagonal[comp[m]], 0.0, 1.0);
    sum += diagonal[comp[m]];
  }
  p.leakage = diagonal.sum() - sum;
  return p;
}

void record(PropagationResult& r, const LabeledBasis& basis, double t, const RVector& diagonal) {
  const Populations p = populations_of(basis, diagonal);
  r.times.push_back(t);
  r.populations.push_back(p.computational);
  r.leakage_trace.push_back(p.leakage);
}

// Superoperator sum_i Gamma_i D[sigma_i^-] + (Gamma_phi_i / 2) D[sigma_z,i] in
// the measurement basis, with sigma operators acting on labeled states.
class Dissipator {
 public:
  Dissipator(const LabeledBasis& basis, const LindbladSpec& spec) {
    const int n = basis.dimension();
    diag_factor_ = RMatrix::Zero(n, n);
    for (int q = 0; q < 2; ++q) {
      RVector excited = RVector::Zero(n);
      RVector z = RVector::Zero(n);
      std::vector<std::pair<int, int>> pairs;
      for (int j = 0; j < n; ++j) {
        const auto& label = basis.label(j);
        if (!label) continue;
        const int level = q == 0 ? label->q1 : label->q2;
        if (level > 1) continue;
        z[j] = level == 0 ? 1.0 : -1.0;
        if (level == 1) {
          excited[j] = 1.0;
          BareLabel lower = *label;
          (q == 0 ? lower.q1 : lower.q2) = 0;
          if (auto a = basis.find(lower)) pairs.emplace_back(*a, j);
        }
      }
      const double g = spec.relaxation[q];
      const double gphi = 0.5 * spec.dephasing[q];
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          diag_factor_(j, k) += -0.5 * g * (excited[j] + excited[k]) +
                                gphi * (z[j] * z[k] - 0.5 * (z[j] * z[j] + z[k] * z[k]));
      if (g > 0.0) jumps_.push_back({g, std::move(pairs)});
    }
    rate_scale_ = diag_factor_.cwiseAbs().maxCoeff();
    for (const auto& j : jumps_) rate_scale_ = std::max(rate_scale_, j.rate);
  }

  void apply(const CMatrix& rho, CMatrix& out) const {
    out = diag_factor_.cast<Complex>().cwiseProduct(rho);
    for (const auto& jump : jumps_)
      for (const auto& [a, b] : jump.pairs)
        for (const auto& [a2, b2] : jump.pairs) out(a, a2) += jump.rate * rho(b, b2);
  }

  void step(CMatrix& rho, double h) const {
    if (rate_scale_ == 0.0 || h == 0.0) return;
    const int sub = std::max(1, static_cast<int>(std::ceil(h * rate_scale_ / 0.01)));
    const double dh = h / sub;
    CMatrix k1, k2, k3, k4;
    for (int s = 0; s < sub; ++s) {
      apply(rho, k1);
      apply(rho + 0.5 * dh * k1, k2);
      apply(rho + 0.5 * dh * k2, k3);
      apply(rho + dh * k3, k4);
      rho += (dh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }

 private:
  struct Jump {
    double rate;
    std::vector<std::pair<int, int>> pairs;  // (lower, upper) eigen indices
  };
  RMatrix diag_factor_;
  std::vector<Jump> jumps_;
  double rate_scale_ = 0.0;
};

void apply_segment(const Propagator& p, const Propagator::Segment& seg, CMatrix& rho) {
  if (seg.diagonal) {
    const CVector ph = p.free_phases(seg.duration);
    rho = ph.asDiagonal() * rho * ph.conjugate().asDiagonal();
  } else {
    rho = seg.unitary * rho * seg.unitary.adjoint();
  }
}

using SampleFn = std::function<void(double, const CMatrix&)>;

// Lab-frame split-step evolution: half dissipative step, segment unitary,
// half dissipative step. Inputs and outputs are interaction-frame operators.
void master_equation(const Propagator& p, const FluxPulse& pulse, const LindbladSpec& spec,
                     std::vector<CMatrix>& rhos, bool hermitian, const SampleFn& sample) {
  spec.validate();
  const std::vector<Propagator::Segment> segs =
      p.segments(pulse, pulse.delta == 0.0 ? p.options().idle_dissipation_step
                                           : p.options().dissipation_step);
  const Dissipator diss(p.basis(), spec);
  double t = 0.0;
  for (const auto& seg : segs) {
    for (auto& rho : rhos) {
      diss.step(rho, 0.5 * seg.duration);
      apply_segment(p, seg, rho);
      diss.step(rho, 0.5 * seg.duration);
      if (hermitian) rho = 0.5 * (rho + rho.adjoint()).eval();
    }
    t += seg.duration;
    if (sample) sample(t, rhos.front());
  }
  const CVector back = p.free_phases(t).conjugate();
  for (auto& rho : rhos) rho = back.asDiagonal() * rho * back.conjugate().asDiagonal();
}

}  // namespace

PropagationResult propagate_unitary(const Propagator& propagator, const FluxPulse& pulse,
                                    const CVector& initial, double sample_interval) {
  if (initial.size() != propagator.dimension())
    throw ConfigError("propagate_unitary: state has the wrong dimension");
  const double norm0 = initial.norm();
  if (std::abs(norm0 - 1.0) > 1e-8) throw ConfigError("propagate_unitary: state is not normalized");
  PropagationResult r;
  const LabeledBasis& basis = propagator.basis();
  record(r, basis, 0.0, initial.cwiseAbs2());
  CVector psi;
  if (sample_interval > 0.0) {
    CVector lab = initial;
    double t = 0.0;
    for (const auto& seg : propagator.segments(pulse, sample_interval)) {
      lab = seg.diagonal ? CVector(propagator.free_phases(seg.duration).cwiseProduct(lab))
                         : CVector(seg.unitary * lab);
      t += seg.duration;
      record(r, basis, t, lab.cwiseAbs2());
    }
    psi = propagator.free_phases(t).conjugate().cwiseProduct(lab);
  } else {
    psi = propagator.evolve(pulse, initial);
    record(r, basis, pulse.total_duration(), psi.cwiseAbs2());
  }
  if (std::abs(psi.norm() - norm0) > 1e-8)
    throw NumericalError("dynamics", "norm drifted during unitary propagation");
  r.leakage = r.leakage_trace.back();
  r.state = std::move(psi);
  return r;
}

PropagationResult propagate_lindblad(const Propagator& propagator, const FluxPulse& pulse,
                                     const LindbladSpec& lindblad, const DensityState& initial,
                                     double sample_interval) {
  if (initial.space().dimension() != propagator.dimension())
    throw ConfigError("propagate_lindblad: state has the wrong dimension");
  PropagationResult r;
  const LabeledBasis& basis = propagator.basis();
  record(r, basis, 0.0, initial.matrix().diagonal().real());
  std::vector<CMatrix> rhos{initial.matrix()};
  double next_sample = sample_interval;
  SampleFn sampler;
  if (sample_interval > 0.0)
    sampler = [&](double t, const CMatrix& rho) {
      if (t + 1e-15 < next_sample) return;
      record(r, basis, t, rho.diagonal().real());
      next_sample += sample_interval;
    };
  master_equation(propagator, pulse, lindblad, rhos, true, sampler);
  CMatrix& rho = rhos.front();
  if (std::abs(rho.trace().real() - 1.0) > 1e-7)
    throw NumericalError("dynamics", "trace drifted during master-equation integration");
  const double min_eig = eigendecompose_hermitian(rho).values.minCoeff();
  if (min_eig < -1e-6)
    throw NumericalError("dynamics", "integration instability: density matrix eigenvalue " +
                                         std::to_string(min_eig));
  if (r.times.back() < pulse.total_duration() - 1e-15)
    record(r, basis, pulse.total_duration(), rho.diagonal().real());
  else if (sample_interval > 0.0)
    r.times.back() = pulse.total_duration();
  r.leakage = r.leakage_trace.back();
  r.density = std::move(rho);
  return r;
}

CMatrix evolve_operator(const Propagator& propagator, const FluxPulse& pulse,
                        const LindbladSpec& lindblad, const CMatrix& rho) {
  if (lindblad.is_zero()) {
    const CMatrix u = propagator.unitary(pulse);
    return u * rho * u.adjoint();
  }
  std::vector<CMatrix> rhos{rho};
  master_equation(propagator, pulse, lindblad, rhos, false, {});
  return rhos.front();
}

struct PulseProcess::Impl {
  const Propagator* propagator;
  std::optional<Dissipator> dissipator;
  std::vector<Propagator::Segment> segments;
  CMatrix unitary;  // unitary case, Z corrections included
  CVector z;
  double total = 0.0;
};

PulseProcess::PulseProcess(const Propagator& propagator, const FluxPulse& pulse,
                           std::optional<LindbladSpec> lindblad, double phi1, double phi2)
    : impl_(std::make_unique<Impl>()) {
  impl_->propagator = &propagator;
  impl_->z = z_correction(propagator.basis(), phi1, phi2);
  impl_->total = pulse.total_duration();
  if (!lindblad || lindblad->is_zero()) {
    impl_->unitary = impl_->z.asDiagonal() * propagator.unitary(pulse);
    return;
  }
  lindblad->validate();
  impl_->dissipator.emplace(propagator.basis(), *lindblad);
  impl_->segments = propagator.segments(pulse, pulse.delta == 0.0
                                                   ? propagator.options().idle_dissipation_step
                                                   : propagator.options().dissipation_step);
}

PulseProcess::~PulseProcess() = default;
PulseProcess::PulseProcess(PulseProcess&&) noexcept = default;
PulseProcess& PulseProcess::operator=(PulseProcess&&) noexcept = default;

const LabeledBasis& PulseProcess::basis() const noexcept { return impl_->propagator->basis(); }
bool PulseProcess::is_unitary() const noexcept { return !impl_->dissipator.has_value(); }

const CMatrix& PulseProcess::unitary() const {
  if (!is_unitary()) throw ConfigError("PulseProcess: process is not unitary");
  return impl_->unitary;
}

CMatrix PulseProcess::apply(const CMatrix& rho) const {
  if (is_unitary()) return impl_->unitary * rho * impl_->unitary.adjoint();
  CMatrix r = rho;
  for (const auto& seg : impl_->segments) {
    impl_->dissipator->step(r, 0.5 * seg.duration);
    apply_segment(*impl_->propagator, seg, r);
    impl_->dissipator->step(r, 0.5 * seg.duration);
  }
  const CVector back = impl_->propagator->free_phases(impl_->total).conjugate().cwiseProduct(impl_->z);
  return back.asDiagonal() * r * back.conjugate().asDiagonal();
}

CVector z_correction(const LabeledBasis& basis, double phi1, double phi2) {
  CVector z = CVector::Ones(basis.dimension());
  for (int j = 0; j < basis.dimension(); ++j)
    if (const auto& l = basis.label(j)) z[j] = std::exp(kI * (phi1 * l->q1 + phi2 * l->q2));
  return z;
}

CMatrix computational_block(const Propagator& propagator, const FluxPulse& pulse, double phi1,
                            double phi2) {
  const auto comp = propagator.basis().computational();
  CMatrix in = CMatrix::Zero(propagator.dimension(), 4);
  for (int m = 0; m < 4; ++m) in(comp[m], m) = 1.0;
  const CMatrix out = propagator.evolve(pulse, in);
  CMatrix block(4, 4);
  for (int a = 0; a < 4; ++a)
    for (int m = 0; m < 4; ++m) block(a, m) = out(comp[a], m);
  const CVector z = z_correction(propagator.basis(), phi1, phi2);
  for (int a = 0; a < 4; ++a) block.row(a) *= z[comp[a]];
  return block;
}

PauliTransferMatrix computational_ptm(const Propagator& propagator, const FluxPulse& pulse,
                                      const std::optional<LindbladSpec>& lindblad, double phi1,
                                      double phi2) {
  if (!lindblad || lindblad->is_zero()) {
    const CMatrix m = computational_block(propagator, pulse, phi1, phi2);
    return PauliTransferMatrix::from_channel(
        [&m](const CMatrix& rho) -> CMatrix { return m * rho * m.adjoint(); }, 2);
  }
  const auto comp = propagator.basis().computational();
  const int n = propagator.dimension();
  // Images of the matrix units |a><b| for a <= b; the rest follow by adjoint.
  std::vector<CMatrix> rhos;
  std::vector<std::pair<int, int>> units;
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      CMatrix e = CMatrix::Zero(n, n);
      e(comp[a], comp[b]) = 1.0;
      rhos.push_back(std::move(e));
      units.emplace_back(a, b);
    }
  master_equation(propagator, pulse, *lindblad, rhos, false, {});
  const CVector z = z_correction(propagator.basis(), phi1, phi2);
  std::array<std::array<CMatrix, 4>, 4> image;
  for (std::size_t u = 0; u < units.size(); ++u) {
    CMatrix block(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        block(i, j) = z[comp[i]] * rhos[u](comp[i], comp[j]) * std::conj(z[comp[j]]);
    const auto [a, b] = units[u];
    image[a][b] = block;
    if (a != b) image[b][a] = block.adjoint();
  }
  return PauliTransferMatrix::from_channel(
      [&image](const CMatrix& rho) -> CMatrix {
        CMatrix out = CMatrix::Zero(4, 4);
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            if (rho(a, b) != 0.0) out += rho(a, b) * image[a][b];
        return out;
      },
      2);
}

double average_gate_fidelity(const PauliTransferMatrix& channel, const CMatrix& ideal,
                             const FidelityOptions& options) {
  const int d = channel.dimension();
  if (ideal.rows() != d || ideal.cols() != d)
    throw ConfigError("average_gate_fidelity: ideal gate has the wrong dimension");
  if (max_abs(ideal.adjoint() * ideal - CMatrix::Identity(d, d)) > 1e-8)
    throw ConfigError("average_gate_fidelity: ideal gate is not unitary");
  const double retained = channel.trace_retention();
  if (retained > 1.0 + options.trace_tolerance)
    throw ConfigError("average_gate_fidelity: channel increases the trace");
  if (!options.allow_trace_loss && std::abs(retained - 1.0) > options.trace_tolerance)
    throw ConfigError("average_gate_fidelity: channel is not trace preserving");
  const double f_pro = channel.process_fidelity(ideal);
  double f = 0.0;
  if (options.convention == LeakageConvention::kTraceLoss) {
    f = (d * f_pro + retained) / (d + 1);
  } else {
    if (retained <= 0.0) throw NumericalError("dynamics", "channel retains no population");
    f = (d * f_pro / retained + 1.0) / (d + 1);
  }
  return std::clamp(f, 0.0, 1.0);
}

double average_gate_fidelity(const OperatorChannel& channel, const CMatrix& ideal,
                             const FidelityOptions& options) {
  const int qubits = ideal.rows() == 4 ? 2 : ideal.rows() == 2 ? 1 : 0;
  if (qubits == 0) throw ConfigError("average_gate_fidelity: expected a 2x2 or 4x4 gate");
  return average_gate_fidelity(PauliTransferMatrix::from_channel(channel, qubits), ideal,
                               options);
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

double lorentzian(const RVector& p, double x) {
  const double u = (x - p[1]) / p[2];
  return p[0] / (1.0 + u * u) + p[3];
}

}  // namespace

ChevronMap chevron_scan(const Propagator& propagator, const FluxPulse& pulse_template,
                        const std::vector<double>& omegas, const std::vector<double>& durations) {
  if (omegas.empty() || durations.empty()) throw ConfigError("chevron_scan: empty grid");
  ChevronMap map;
  map.omegas = omegas;
  map.durations = durations;
  map.transfer = RMatrix::Zero(static_cast<Eigen::Index>(omegas.size()),
                               static_cast<Eigen::Index>(durations.size()));
  const LabeledBasis& basis = propagator.basis();
  const int from = basis.index({0, 1, 0});
  const int to = basis.index({1, 0, 0});
  CVector psi0 = CVector::Zero(propagator.dimension());
  psi0[from] = 1.0;
  const std::size_t cells = omegas.size() * durations.size();
  parallel_for(cells, [&](std::size_t cell) {
    const std::size_t i = cell / durations.size();
    const std::size_t j = cell % durations.size();
    FluxPulse p = pulse_template.with_total_width(durations[j]);
    p.omega_phi = omegas[i];
    const CVector psi = propagator.evolve(p, psi0);
    map.transfer(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::norm(psi[to]);
  });
  for (Eigen::Index i = 0; i < map.transfer.rows(); ++i) {
    map.mean_transfer.push_back(map.transfer.row(i).mean());
    map.contrast.push_back(map.transfer.row(i).maxCoeff() - map.transfer.row(i).minCoeff());
  }

  Eigen::Index best = 0;
  RVector mean = Eigen::Map<const RVector>(map.mean_transfer.data(),
                                           static_cast<Eigen::Index>(omegas.size()));
  mean.maxCoeff(&best);
  map.resonance = omegas[best];
  map.resonance_width = 0.0;
  if (omegas.size() >= 5) {
    const double lo = std::min(omegas.front(), omegas.back());
    const double hi = std::max(omegas.front(), omegas.back());
    const double floor = mean.minCoeff();
    const double half = 0.5 * (mean[best] + floor);
    int above = 0;
    for (Eigen::Index i = 0; i < mean.size(); ++i) above += mean[i] >= half;
    const double spacing = (hi - lo) / static_cast<double>(omegas.size() - 1);
    RVector x0(4);
    x0 << mean[best] - floor, omegas[best], std::max(spacing, 0.5 * above * spacing), floor;
    LeastSquaresOptions opts;
    opts.lower = RVector(4);
    opts.upper = RVector(4);
    *opts.lower << 0.0, lo, 0.25 * spacing, -1.0;
    *opts.upper << 2.0, hi, hi - lo, 1.0;
    const auto fit = levenberg_marquardt(
        [&](const RVector& p) {
          RVector r(mean.size());
          for (Eigen::Index i = 0; i < mean.size(); ++i) r[i] = lorentzian(p, omegas[i]) - mean[i];
          return r;
        },
        x0, opts);
    if (fit.converged && fit.x[1] > lo && fit.x[1] < hi) {
      map.resonance = fit.x[1];
      map.resonance_width = fit.x[2];
    }
  }
  return map;
}

namespace {

// Ideal pi/2 rotation about y on every labeled (q = 0, q = 1) pair of `qubit`.
CMatrix half_pi_y(const LabeledBasis& basis, int qubit) {
  const int n = basis.dimension();
  CMatrix r = CMatrix::Identity(n, n);
  const double s = std::numbers::sqrt2 / 2.0;
  for (int j = 0; j < n; ++j) {
    const auto& l = basis.label(j);
    if (!l || (qubit == 0 ? l->q1 : l->q2) != 0) continue;
    BareLabel up = *l;
    (qubit == 0 ? up.q1 : up.q2) = 1;
    const auto k = basis.find(up);
    if (!k) continue;
    r(j, j) = s;
    r(j, *k) = -s;
    r(*k, j) = s;
    r(*k, *k) = s;
  }
  return r;
}

}  // namespace

RamseyResult ramsey_shift(const Propagator& propagator, const FluxPulse& pulse, int qubit,
                          const std::vector<double>& flat_durations) {
  if (qubit != 0 && qubit != 1) throw ConfigError("ramsey_shift: qubit must be 0 or 1");
  if (flat_durations.size() < 3) throw ConfigError("ramsey_shift: need at least three durations");
  const LabeledBasis& basis = propagator.basis();
  const int ground = basis.index({0, 0, 0});
  const int excited = basis.index(qubit == 0 ? BareLabel{1, 0, 0} : BareLabel{0, 1, 0});
  const CMatrix r = half_pi_y(basis, qubit);
  CVector psi0 = CVector::Zero(propagator.dimension());
  psi0[ground] = 1.0;
  psi0 = r * psi0;

  RamseyResult out;
  out.flat_durations = flat_durations;
  out.phases.resize(flat_durations.size());
  out.excited_population.resize(flat_durations.size());
  parallel_for(flat_durations.size(), [&](std::size_t i) {
    FluxPulse first = pulse;
    first.flat_duration = flat_durations[i];
    const double t1 = first.total_duration();
    FluxPulse second = first.with_phase(first.phase + std::numbers::pi + first.omega_phi * t1);
    CVector psi = propagator.evolve(first, psi0);
    // Continue in the lab frame from t1, then shift the frame back.
    const CVector shift = propagator.free_phases(t1);
    psi = shift.conjugate().cwiseProduct(propagator.evolve(second, CVector(shift.cwiseProduct(psi))));
    const Complex coherence = std::conj(psi[ground]) * psi[excited];
    out.phases[i] = std::arg(coherence);
    out.excited_population[i] = std::norm((r * psi)[excited]);
  });
  for (std::size_t i = 1; i < out.phases.size(); ++i) {
    double d = out.phases[i] - out.phases[i - 1];
    d -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
    out.phases[i] = out.phases[i - 1] + d;
  }
  // Phase of |1> relative to |0> falls as -shift * (2 t) over the two exchanges.
  const auto n = static_cast<double>(flat_durations.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < flat_durations.size(); ++i) {
    sx += flat_durations[i];
    sy += out.phases[i];
    sxx += flat_durations[i] * flat_durations[i];
    sxy += flat_durations[i] * out.phases[i];
  }
  const double var = sxx - sx * sx / n;
  if (!(var > 0.0)) throw ConfigError("ramsey_shift: durations must differ");
  const double slope = (sxy - sx * sy / n) / var;
  const double intercept = (sy - slope * sx) / n;
  double rss = 0.0;
  for (std::size_t i = 0; i < flat_durations.size(); ++i) {
    const double e = out.phases[i] - intercept - slope * flat_durations[i];
    rss += e * e;
  }
  const double rms = std::sqrt(rss / n);
  if (rms > 0.3)
    throw NumericalError("dynamics", "Ramsey phase is not linear in time (rms residual " +
                                         std::to_string(rms) + " rad)");
  out.shift = -0.5 * slope;
  out.shift_uncertainty = n > 2 ? 0.5 * std::sqrt(rss / (n - 2) / var) : 0.0;
  return out;
}

RamseyResult ramsey_shift(const Propagator& propagator, const FluxPulse& pulse, int qubit) {
  return ramsey_shift(propagator, pulse, qubit, {0.0, 20e-9, 40e-9, 60e-9, 80e-9, 100e-9});
}

}  // namespace tbus
