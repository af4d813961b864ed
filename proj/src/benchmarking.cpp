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

#include "tbus/benchmarking.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tbus/errors.hpp"
#include "tbus/optimize.hpp"
#include "tbus/parallel.hpp"
#include "tbus/random.hpp"

namespace tbus {

namespace {

constexpr double kDim = 4.0;

const std::vector<RMatrix>& local_ptms() {
  static const std::vector<RMatrix> table = [] {
    const CliffordGroup& c1 = CliffordGroup::one_qubit();
    std::vector<RMatrix> single;
    for (int i = 0; i < c1.size(); ++i)
      single.push_back(PauliTransferMatrix::from_unitary(c1.unitary(i)).matrix());
    std::vector<RMatrix> out;
    for (int a = 0; a < c1.size(); ++a)
      for (int b = 0; b < c1.size(); ++b) {
        RMatrix m(16, 16);
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) m.block(4 * i, 4 * j, 4, 4) = single[a](i, j) * single[b];
        out.push_back(std::move(m));
      }
    return out;
  }();
  return table;
}

const RMatrix& ideal_iswap_ptm() {
  static const RMatrix r = PauliTransferMatrix::from_unitary(iswap_unitary()).matrix();
  return r;
}

RVector ground_pauli_vector() {
  RVector v = RVector::Zero(16);
  v[0] = v[3] = v[12] = v[15] = 1.0;  // II, IZ, ZI, ZZ
  return v;
}

std::array<double, 3> survival_from_pauli(const RVector& v) {
  return {std::clamp(0.25 * (v[0] + v[3] + v[12] + v[15]), 0.0, 1.0),
          std::clamp(0.5 * (v[0] + v[12]), 0.0, 1.0), std::clamp(0.5 * (v[0] + v[3]), 0.0, 1.0)};
}

// --- time-domain helpers -----------------------------------------------------

struct LevelMap {
  std::vector<int> q1, q2, tb;  // -1 for unlabeled states
};

LevelMap level_map(const LabeledBasis& basis) {
  LevelMap m;
  const int n = basis.dimension();
  m.q1.assign(n, -1);
  m.q2.assign(n, -1);
  m.tb.assign(n, -1);
  for (int j = 0; j < n; ++j)
    if (const auto& l = basis.label(j)) {
      m.q1[j] = l->q1;
      m.q2[j] = l->q2;
      m.tb[j] = l->tb;
    }
  return m;
}

// Single-qubit operators on each transmon's {0, 1} levels for every
// spectator configuration; level 2 and unlabeled states are untouched.
CMatrix embed_local(const LevelMap& m, const CMatrix& a2, const CMatrix& b2) {
  CMatrix a = CMatrix::Identity(3, 3), b = CMatrix::Identity(3, 3);
  a.topLeftCorner(2, 2) = a2;
  b.topLeftCorner(2, 2) = b2;
  const int n = static_cast<int>(m.q1.size());
  CMatrix u = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    if (m.q1[j] < 0) {
      u(j, j) = 1.0;
      continue;
    }
    for (int k = 0; k < n; ++k)
      if (m.q1[k] >= 0 && m.tb[k] == m.tb[j])
        u(j, k) = a(m.q1[j], m.q1[k]) * b(m.q2[j], m.q2[k]);
  }
  if (max_abs(u.adjoint() * u - CMatrix::Identity(n, n)) > 1e-9)
    throw NumericalError("benchmarking", "labeled basis is missing product states");
  return u;
}

struct TimeDomainContext {
  const PulseProcess* process;
  LevelMap levels;
  std::vector<std::optional<CMatrix>> locals;  // filled on demand per thread
  CMatrix pi1, pi2;

  explicit TimeDomainContext(const PulseProcess& p)
      : process(&p), levels(level_map(p.basis())), locals(576) {
    CMatrix x(2, 2), id = CMatrix::Identity(2, 2);
    x << 0, 1, 1, 0;
    pi1 = embed_local(levels, x, id);
    pi2 = embed_local(levels, id, x);
  }

  const CMatrix& local(int a, int b) {
    auto& slot = locals[static_cast<std::size_t>(24 * a + b)];
    if (!slot) {
      const CliffordGroup& c1 = CliffordGroup::one_qubit();
      slot = embed_local(levels, c1.unitary(a), c1.unitary(b));
    }
    return *slot;
  }

  CMatrix ground() const {
    const int n = static_cast<int>(levels.q1.size());
    CMatrix rho = CMatrix::Zero(n, n);
    rho(process->basis().index({0, 0, 0}), process->basis().index({0, 0, 0})) = 1.0;
    return rho;
  }

  void apply_element(CMatrix& rho, int e) {
    const CliffordGroup& g = CliffordGroup::two_qubit();
    for (const auto& s : g.decomposition(e)) {
      if (s.iswap) {
        rho = process->apply(rho);
      } else if (s.q1 != 0 || s.q2 != 0) {
        const CMatrix& u = local(s.q1, s.q2);
        rho = u * rho * u.adjoint();
      }
    }
  }

  std::array<double, 3> survival(const CMatrix& rho) const {
    std::array<double, 3> s{};
    for (std::size_t j = 0; j < levels.q1.size(); ++j) {
      const double p = rho(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)).real();
      if (levels.q1[j] == 0 && levels.q2[j] == 0 && levels.tb[j] == 0) s[0] += p;
      if (levels.q1[j] == 0) s[1] += p;
      if (levels.q2[j] == 0) s[2] += p;
    }
    return s;
  }

  double signal(const CMatrix& rho, int qubit, double level2) const {
    const auto& lv = qubit == 0 ? levels.q1 : levels.q2;
    double s = 0.0;
    for (std::size_t j = 0; j < lv.size(); ++j) {
      const double p = rho(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)).real();
      s += p * (lv[j] == 0 ? 1.0 : lv[j] == 1 ? 0.0 : level2);
    }
    return s;
  }

  CMatrix computational_block(const CMatrix& rho) const {
    const auto comp = process->basis().computational();
    CMatrix b(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) b(i, j) = rho(comp[i], comp[j]);
    return b;
  }
};

void apply_element_ptm(const NoiseModel& noise, RVector& v, int e) {
  const CliffordGroup& g = CliffordGroup::two_qubit();
  const auto& locals = local_ptms();
  const RMatrix& swap = noise.iswap ? noise.iswap->matrix() : ideal_iswap_ptm();
  for (const auto& s : g.decomposition(e)) {
    if (s.iswap)
      v = swap * v;
    else if (s.q1 != 0 || s.q2 != 0)
      v = locals[static_cast<std::size_t>(24 * s.q1 + s.q2)] * v;
  }
  if (noise.clifford_noise) v = noise.clifford_noise->matrix() * v;
}

bool is_interleave_slot(const std::optional<InterleavedGate>& il, std::size_t pos,
                        std::size_t size) {
  return il && pos + 1 < size && pos % 2 == 1;
}

std::uint64_t sequence_seed(std::uint64_t master, int length, int seed) {
  return derive_seed(master, static_cast<std::uint64_t>(length), static_cast<std::uint64_t>(seed));
}

}  // namespace

// ---------------------------------------------------------------------------

NoiseModel NoiseModel::ideal() { return NoiseModel{}; }

NoiseModel NoiseModel::depolarizing(double error_per_clifford) {
  if (!(error_per_clifford >= 0.0 && error_per_clifford <= 0.75))
    throw ConfigError("depolarizing error per Clifford must lie in [0, 0.75]");
  NoiseModel n;
  n.clifford_noise = PauliTransferMatrix::depolarizing(1.0 - error_per_clifford * kDim / (kDim - 1.0), 2);
  return n;
}

NoiseModel NoiseModel::from_gate(PauliTransferMatrix iswap_ptm) {
  NoiseModel n;
  n.iswap = std::move(iswap_ptm);
  n.validate();
  return n;
}

NoiseModel NoiseModel::time_domain(std::shared_ptr<const PulseProcess> process) {
  NoiseModel n;
  n.mode = NoiseMode::kTimeDomain;
  n.process = std::move(process);
  n.validate();
  return n;
}

void NoiseModel::validate() const {
  if (mode == NoiseMode::kTimeDomain) {
    if (!process) throw ConfigError("time-domain noise model needs a gate process");
    return;
  }
  for (const auto* p : {iswap ? &*iswap : nullptr, clifford_noise ? &*clifford_noise : nullptr}) {
    if (!p) continue;
    if (p->num_qubits() != 2) throw ConfigError("noise PTMs must act on two qubits");
    constexpr double kLeakageTolerance = 1e-2;
    if (std::abs(p->trace_retention() - 1.0) > kLeakageTolerance)
      throw ConfigError("noise PTM loses more trace than the leakage tolerance");
  }
}

void RBOptions::validate() const {
  std::vector<int> sorted = lengths;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.size() < 2) throw ConfigError("RB needs at least two distinct lengths");
  if (sorted.front() < 1) throw ConfigError("RB lengths must be positive");
  if (seeds < 1) throw ConfigError("RB needs at least one seed per length");
}

double error_per_clifford(double alpha) { return (kDim - 1.0) / kDim * (1.0 - alpha); }

// ---------------------------------------------------------------------------

DecayFit fit_decay(const std::vector<std::pair<double, double>>& points,
                   std::optional<double> mixed_level) {
  std::map<double, std::vector<double>> by_m;
  for (const auto& [m, y] : points) {
    if (!std::isfinite(m) || !std::isfinite(y)) throw ConfigError("fit_decay: non-finite data");
    by_m[m].push_back(y);
  }
  if (by_m.size() < 3) throw ConfigError("fit_decay: need at least three distinct lengths");
  double lo = points.front().second, hi = lo;
  for (const auto& p : points) {
    lo = std::min(lo, p.second);
    hi = std::max(hi, p.second);
  }
  DecayFit out;
  if (hi - lo < 1e-12) {
    out.b = std::clamp(lo, 0.0, 1.0);
    out.degenerate = true;
    if (mixed_level && std::abs(lo - *mixed_level) < 1e-9) out.alpha = 0.0;
    return out;
  }
  std::vector<double> ms, means;
  for (const auto& [m, ys] : by_m) {
    double s = 0.0;
    for (double y : ys) s += y;
    ms.push_back(m);
    means.push_back(s / static_cast<double>(ys.size()));
  }
  auto residuals = [&](const RVector& x) {
    RVector r(static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i)
      r[static_cast<Eigen::Index>(i)] = x[0] * std::pow(x[1], points[i].first) + x[2] - points[i].second;
    return r;
  };
  LeastSquaresOptions opts;
  opts.max_iterations = 200;
  opts.lower = RVector(3);
  opts.upper = RVector(3);
  *opts.lower << -2.0, 1e-9, 0.0;
  *opts.upper << 2.0, 1.0, 1.0;

  std::optional<LeastSquaresResult> best;
  for (double b0 : {std::clamp(means.back(), 0.0, 1.0), 0.25, 0.5, 0.0}) {
    // Log-linear regression of (y - B) for the starting decay rate.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const double d = means[i] - b0;
      if (d <= 1e-9) continue;
      sx += ms[i];
      sy += std::log(d);
      sxx += ms[i] * ms[i];
      sxy += ms[i] * std::log(d);
      ++n;
    }
    double alpha0 = 0.95, a0 = means.front() - b0;
    if (n >= 2 && sxx - sx * sx / n > 0.0) {
      const double slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
      alpha0 = std::clamp(std::exp(slope), 1e-3, 1.0 - 1e-9);
      a0 = std::exp((sy - slope * sx) / n);
    }
    RVector x0(3);
    x0 << std::clamp(a0, -2.0, 2.0), alpha0, b0;
    LeastSquaresResult r = levenberg_marquardt(residuals, x0, opts);
    if (r.converged && (!best || r.cost < best->cost)) best = std::move(r);
  }
  if (!best) throw NumericalError("benchmarking", "decay fit did not converge in 200 iterations");
  out.a = best->x[0];
  out.alpha = best->x[1];
  out.b = best->x[2];
  out.iterations = best->iterations;
  for (int k = 0; k < 3; ++k)
    out.standard_error[k] = std::sqrt(std::max(0.0, best->covariance(k, k)));
  if (!(out.alpha > 0.0 && out.alpha <= 1.0))
    throw NumericalError("benchmarking", "fitted decay constant outside (0, 1]");
  return out;
}

// ---------------------------------------------------------------------------

std::array<double, 3> sequence_survival(const NoiseModel& noise, const std::vector<int>& sequence,
                                        const std::optional<InterleavedGate>& interleave) {
  noise.validate();
  if (noise.mode == NoiseMode::kPtmComposition) {
    RVector v = ground_pauli_vector();
    for (std::size_t k = 0; k < sequence.size(); ++k) {
      if (is_interleave_slot(interleave, k, sequence.size()) && interleave->channel)
        v = interleave->channel->matrix() * v;
      else
        apply_element_ptm(noise, v, sequence[k]);
    }
    return survival_from_pauli(v);
  }
  if (interleave && interleave->channel)
    throw ConfigError("time-domain RB cannot use an interleaved channel override");
  TimeDomainContext ctx(*noise.process);
  CMatrix rho = ctx.ground();
  for (int e : sequence) ctx.apply_element(rho, e);
  return ctx.survival(rho);
}

namespace {

RBResult run_rb(const NoiseModel& noise, const RBOptions& options,
                const std::optional<InterleavedGate>& interleave) {
  options.validate();
  noise.validate();
  const CliffordGroup& group = CliffordGroup::two_qubit();
  RBResult r;
  r.lengths = options.lengths;
  const std::size_t nl = options.lengths.size();
  const auto ns = static_cast<std::size_t>(options.seeds);
  r.survival.assign(nl, std::vector<double>(ns));
  r.qubit_survival[0] = r.survival;
  r.qubit_survival[1] = r.survival;
  parallel_for(nl * ns, [&](std::size_t cell) {
    const std::size_t li = cell / ns;
    const std::size_t si = cell % ns;
    const int m = options.lengths[li];
    const auto seq = sample_rb_sequence(
        group, m, sequence_seed(options.master_seed, m, static_cast<int>(si)),
        interleave ? std::optional<int>(interleave->element) : std::nullopt);
    const auto s = sequence_survival(noise, seq, interleave);
    r.survival[li][si] = s[0];
    r.qubit_survival[0][li][si] = s[1];
    r.qubit_survival[1][li][si] = s[2];
  });
  auto points = [&](const std::vector<std::vector<double>>& data) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t li = 0; li < nl; ++li)
      for (double y : data[li]) pts.emplace_back(options.lengths[li], y);
    return pts;
  };
  r.fit = fit_decay(points(r.survival), 1.0 / kDim);
  for (int q = 0; q < 2; ++q) {
    r.qubit_fits[q] = fit_decay(points(r.qubit_survival[q]), 0.5);
    r.qubit_error_per_clifford[q] = error_per_clifford(r.qubit_fits[q].alpha);
  }
  r.error_per_clifford = error_per_clifford(r.fit.alpha);
  r.error_per_clifford_stderr = (kDim - 1.0) / kDim * r.fit.standard_error[1];
  r.iswaps_per_clifford = group.average_iswap_count();
  r.error_per_gate = r.error_per_clifford / r.iswaps_per_clifford;
  return r;
}

}  // namespace

RBResult run_standard_rb(const NoiseModel& noise, const RBOptions& options) {
  return run_rb(noise, options, std::nullopt);
}

InterleavedResult run_interleaved_rb(const NoiseModel& noise, const InterleavedGate& gate,
                                     const RBOptions& options,
                                     const std::optional<RBResult>& reference) {
  const CliffordGroup& group = CliffordGroup::two_qubit();
  if (gate.element < 0 || gate.element >= group.size())
    throw ConfigError("interleaved gate is not a two-qubit Clifford");
  InterleavedResult out;
  out.reference = reference ? *reference : run_standard_rb(noise, options);
  out.interleaved = run_rb(noise, options, gate);
  const double p = out.reference.fit.alpha;
  const double pc = out.interleaved.fit.alpha;
  const double sp = out.reference.fit.standard_error[1];
  const double spc = out.interleaved.fit.standard_error[1];
  const double ratio = pc / p;
  out.gate_error = (kDim - 1.0) / kDim * (1.0 - ratio);
  out.gate_error_stderr = (kDim - 1.0) / kDim * ratio * std::hypot(spc / pc, sp / p);
  const double d2 = kDim * kDim;
  const double e1 = (kDim - 1.0) * (std::abs(p - ratio) + (1.0 - p)) / kDim;
  const double e2 = 2.0 * (d2 - 1.0) * (1.0 - p) / (p * d2) +
                    4.0 * std::sqrt(std::max(0.0, 1.0 - p)) * std::sqrt(d2 - 1.0) / p;
  const double e = std::min(e1, e2);
  out.lower_bound = std::clamp(out.gate_error - e, 0.0, 1.0);
  out.upper_bound = std::clamp(out.gate_error + e, 0.0, 1.0);
  out.unphysical = pc > p + 2.0 * std::hypot(sp, spc) + 1e-12;
  return out;
}

PurityResult run_purity_rb(const NoiseModel& noise, const PurityOptions& options) {
  options.rb.validate();
  noise.validate();
  options.readout.validate();
  const CliffordGroup& group = CliffordGroup::two_qubit();
  PurityResult r;
  r.lengths = options.rb.lengths;
  const std::size_t nl = r.lengths.size();
  const auto ns = static_cast<std::size_t>(options.rb.seeds);
  r.purity.assign(nl, std::vector<double>(ns));
  parallel_for(nl * ns, [&](std::size_t cell) {
    const std::size_t li = cell / ns;
    const std::size_t si = cell % ns;
    const int m = r.lengths[li];
    const std::uint64_t seed = sequence_seed(options.rb.master_seed, m, static_cast<int>(si));
    // Purity is basis independent, so the recovery element is not needed.
    auto seq = sample_rb_sequence(group, m, seed);
    seq.pop_back();
    CMatrix rho;
    if (noise.mode == NoiseMode::kPtmComposition) {
      RVector v = ground_pauli_vector();
      for (int e : seq) apply_element_ptm(noise, v, e);
      rho = from_pauli_vector(v);
    } else {
      TimeDomainContext ctx(*noise.process);
      CMatrix full = ctx.ground();
      for (int e : seq) ctx.apply_element(full, e);
      rho = ctx.computational_block(full);
    }
    Rng rng(derive_seed(seed, 0x70757269ull));
    const StateTomographyResult st =
        state_tomography(rho, options.tomography_shots, options.readout, rng);
    r.purity[li][si] = 0.25 * st.pauli.squaredNorm();
  });
  std::vector<std::pair<double, double>> pts;
  for (std::size_t li = 0; li < nl; ++li)
    for (double y : r.purity[li]) pts.emplace_back(2.0 * r.lengths[li], y);
  r.fit = fit_decay(pts, 1.0 / kDim);
  r.gamma = r.fit.alpha;
  r.purity_error = (kDim - 1.0) / kDim * (1.0 - std::pow(r.gamma, 1.0 / group.average_iswap_count()));
  return r;
}

LeakageResult run_leakage_rb(const NoiseModel& noise, const RBOptions& options) {
  options.validate();
  noise.validate();
  if (noise.mode != NoiseMode::kTimeDomain)
    throw ConfigError("leakage RB needs the time-domain noise mode (PTMs have no leakage levels)");
  const CliffordGroup& group = CliffordGroup::two_qubit();
  LeakageResult r;
  r.lengths = options.lengths;
  const std::size_t nl = r.lengths.size();
  const auto ns = static_cast<std::size_t>(options.seeds);
  r.metric.assign(nl, std::vector<double>(ns));
  parallel_for(nl * ns, [&](std::size_t cell) {
    const std::size_t li = cell / ns;
    const std::size_t si = cell % ns;
    const int m = r.lengths[li];
    const auto seq =
        sample_rb_sequence(group, m, sequence_seed(options.master_seed, m, static_cast<int>(si)));
    TimeDomainContext ctx(*noise.process);
    CMatrix rho = ctx.ground();
    for (int e : seq) ctx.apply_element(rho, e);
    const double s2 = noise.level2_signal;
    const CMatrix flipped1 = ctx.pi1 * rho * ctx.pi1.adjoint();
    const CMatrix flipped2 = ctx.pi2 * rho * ctx.pi2.adjoint();
    r.metric[li][si] = 0.5 * (ctx.signal(rho, 0, s2) + ctx.signal(rho, 1, s2) +
                              ctx.signal(flipped1, 0, s2) + ctx.signal(flipped2, 1, s2));
  });
  for (const auto& row : r.metric) {
    double s = 0.0;
    for (double x : row) s += x;
    r.mean_metric.push_back(s / static_cast<double>(row.size()));
  }
  // Asymptote: mean over the longest quarter of the lengths.
  std::vector<std::size_t> order(nl);
  for (std::size_t i = 0; i < nl; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return r.lengths[a] > r.lengths[b]; });
  const std::size_t tail = std::max<std::size_t>(1, (nl + 3) / 4);
  double s = 0.0;
  for (std::size_t k = 0; k < tail; ++k) s += r.mean_metric[order[k]];
  r.asymptote = s / static_cast<double>(tail);
  return r;
}

}  // namespace tbus
