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

// End-to-end acceptance run on the bundled device: one PASS/FAIL line per
// criterion, then a summary.
//
// Exit status is 0 when the set of failing criteria equals kKnownFailures
// exactly. A listed criterion that starts passing is also an error, so the
// list cannot silently go stale. README.md explains each listed failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "tbus/benchmarking.hpp"
#include "tbus/calibration.hpp"
#include "tbus/cliffords.hpp"
#include "tbus/config.hpp"
#include "tbus/device.hpp"
#include "tbus/dynamics.hpp"
#include "tbus/hamiltonian.hpp"
#include "tbus/parallel.hpp"
#include "tbus/random.hpp"
#include "tbus/tomography.hpp"
#include "tbus/units.hpp"

using namespace tbus;

namespace {

// --- pinned targets and tolerances ------------------------------------------------

constexpr double kZzTargetKhz = 66.0, kZzRelTol = 0.5;
constexpr double kDetuningTargetMhz = 854.0, kDetuningTolMhz = 5.0;
constexpr double kChevronDelta = 0.153;
constexpr double kChevronShiftMhz = -3.0, kChevronTolMhz = 1.5;
constexpr double kMinWidthLoNs = 130.0, kMinWidthHiNs = 200.0;
constexpr double kGateErrorTarget = 1.5e-2, kGateErrorRelTol = 0.3;
constexpr double kLeakageNegligible = 1e-3, kLeakageFromNs = 150.0;
constexpr double kLeakageSteepBelowNs = 130.0, kLeakageSteepFactor = 10.0;
constexpr double kBellDelta = 0.155;
constexpr double kBellTarget = 0.974, kBellTol = 0.02;
constexpr double kInjectedEpc = 0.02, kInjectedRelTol = 0.05;
constexpr double kRbBandLo = 1.2e-2, kRbBandHi = 3.0e-2;
constexpr double kPurityExactTol = 1e-12, kPurityRelTol = 0.3;
constexpr int kQptShotsPerSetting = 8000, kQptRepetitions = 200;
constexpr double kQptReadout1 = 0.70, kQptReadout2 = 0.73;
constexpr double kQptLo = 0.92, kQptHi = 0.97;
constexpr int kCliffordOrder = 11520;
constexpr double kIswapsPerClifford = 1.5, kIswapsTol = 0.06;
constexpr double kInvariantTol = 1e-9;
constexpr double kDecayTol = 1e-4;
constexpr double kSuiteBudgetSeconds = 300.0;

// 7: interleaved estimate below the band. 9: tomography fidelity a hair above
// it. README.md has the numbers.
const std::set<int> kKnownFailures = {7, 9};

// --------------------------------------------------------------------------------

struct Line {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Line> g_lines;

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  g_lines.push_back({id, name, pass, detail});
  std::printf("[%s] %2d %-28s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

bool within(double x, double lo, double hi) { return x >= lo && x <= hi; }

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Shared state built once and reused by later criteria.
struct Setup {
  DeviceConfig device;
  Propagator propagator;
  LindbladSpec lindblad;
  CalibratedGate gate;             // 183 ns iSWAP
  PauliTransferMatrix gate_ptm;    // with decoherence
  double rb_error_per_gate = NAN;  // from criterion 7

  explicit Setup(DeviceConfig d)
      : device(d),
        propagator(d.params, d.bias),
        lindblad(LindbladSpec::from_device(d.params)),
        gate(calibrate_gate(propagator, units::ns(183.0), GateTarget::kISwap)),
        gate_ptm(build_gate_ptm(propagator, gate, lindblad)) {}
};

// --- criteria --------------------------------------------------------------------

void static_zz(const Setup& s) {
  const double zz = std::abs(units::to_khz(static_zz(s.device.params, s.device.bias)));
  report(1, "static ZZ", std::abs(zz - kZzTargetKhz) <= kZzRelTol * kZzTargetKhz,
         format("|zeta|/2pi = %.1f kHz, band %.0f-%.0f kHz", zz, kZzTargetKhz * (1 - kZzRelTol),
                kZzTargetKhz * (1 + kZzRelTol)));
}

void dressed_detuning(const Setup& s) {
  const double d = units::to_mhz(effective_model(s.device.params, s.device.bias, 0.0).bare_detuning);
  report(2, "dressed detuning", std::abs(d - kDetuningTargetMhz) <= kDetuningTolMhz,
         format("%.2f MHz, target %.0f +- %.0f MHz", d, kDetuningTargetMhz, kDetuningTolMhz));
}

void chevron(const Setup& s) {
  const EffectiveModel em = effective_model(s.device.params, s.device.bias, kChevronDelta);
  std::vector<double> omegas, widths;
  for (int k = 0; k < 21; ++k) omegas.push_back(em.bare_detuning + units::mhz(-10.0 + k));
  for (int k = 0; k < 31; ++k) widths.push_back(units::ns(50.0 + 10.0 * k));
  FluxPulse shape;
  shape.theta = s.device.bias;
  shape.delta = kChevronDelta;
  const ChevronMap map = chevron_scan(s.propagator, shape, omegas, widths);
  const double off = units::to_mhz(map.resonance - em.bare_detuning);
  report(3, "chevron resonance shift", std::abs(off - kChevronShiftMhz) <= kChevronTolMhz,
         format("%+.2f MHz from static detuning (21x31 grid), target %+.1f +- %.1f", off,
                kChevronShiftMhz, kChevronTolMhz));
}

void gate_scan(const Setup& s) {
  const std::vector<double> widths_ns{100, 130, 150, 183, 220, 280};
  std::vector<double> widths;
  for (double w : widths_ns) widths.push_back(units::ns(w));
  const auto scan = gate_error_vs_width(s.propagator, widths, s.lindblad, GateTarget::kISwap);

  std::string table;
  bool all_ok = true;
  for (const auto& p : scan) {
    all_ok &= p.ok;
    table += format(" %.0f:%.2e/%.1e", units::to_ns(p.width), p.error, p.leakage);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < scan.size(); ++i)
    if (scan[i].error < scan[best].error) best = i;
  const bool interior = best > 0 && best + 1 < scan.size();
  const double best_ns = widths_ns[best];
  const double e183 = scan[3].error;
  const bool pass4 = all_ok && interior && within(best_ns, kMinWidthLoNs, kMinWidthHiNs) &&
                     std::abs(e183 - kGateErrorTarget) <= kGateErrorRelTol * kGateErrorTarget;
  report(4, "gate error vs width", pass4,
         format("minimum at %.0f ns (%s), error(183 ns) = %.3e, band %.2e-%.2e", best_ns,
                interior ? "interior" : "edge", e183, kGateErrorTarget * (1 - kGateErrorRelTol),
                kGateErrorTarget * (1 + kGateErrorRelTol)));

  // Negligible from 150 ns up; every width below 130 ns is non-negligible and
  // an order of magnitude above the long-gate worst case.
  double long_worst = 0.0, short_best = INFINITY;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    if (widths_ns[i] >= kLeakageFromNs) long_worst = std::max(long_worst, scan[i].leakage);
    if (widths_ns[i] < kLeakageSteepBelowNs) short_best = std::min(short_best, scan[i].leakage);
  }
  const bool steep = short_best > kLeakageNegligible && short_best > kLeakageSteepFactor * long_worst;
  report(5, "leakage trend", all_ok && long_worst < kLeakageNegligible && steep,
         format("max leakage >= %.0f ns = %.1e, min below %.0f ns = %.1e; "
                "widths(ns):error/leakage%s",
                kLeakageFromNs, long_worst, kLeakageSteepBelowNs, short_best, table.c_str()));
}

void bell(const Setup& s) {
  const CalibratedGate g = calibrate_gate_at_amplitude(s.propagator, kBellDelta, GateTarget::kSqrtISwap);
  const PauliTransferMatrix ptm = build_gate_ptm(s.propagator, g, s.lindblad);
  CMatrix in = CMatrix::Zero(4, 4);
  in(2, 2) = 1.0;  // |10>
  CVector target(4);
  target << 0.0, Complex(0.0, -1.0 / std::sqrt(2.0)), 1.0 / std::sqrt(2.0), 0.0;
  // Leaked population counts against the fidelity.
  const double f = state_fidelity(ptm.apply(in), target);
  report(6, "Bell state", std::abs(f - kBellTarget) <= kBellTol,
         format("F = %.4f (sqrt-iSWAP %.1f ns), target %.3f +- %.2f", f,
                units::to_ns(g.pulse.total_duration()), kBellTarget, kBellTol));
}

void rb(Setup& s) {
  RBOptions o;  // library defaults: lengths 1..48, 20 seeds, master seed 1
  const RBResult dep = run_standard_rb(NoiseModel::depolarizing(kInjectedEpc), o);
  const bool injected = std::abs(dep.error_per_clifford - kInjectedEpc) <= kInjectedRelTol * kInjectedEpc;

  const NoiseModel noise = NoiseModel::from_gate(s.gate_ptm);
  const RBResult std_rb = run_standard_rb(noise, o);
  const auto& c2 = CliffordGroup::two_qubit();
  const InterleavedResult irb = run_interleaved_rb(noise, {c2.iswap_element(), std::nullopt}, o, std_rb);
  s.rb_error_per_gate = std_rb.error_per_gate;
  const double model = 1.0 - average_gate_fidelity(s.gate_ptm, ideal_gate(GateTarget::kISwap));
  const bool pass = injected && within(std_rb.error_per_gate, kRbBandLo, kRbBandHi) &&
                    within(irb.gate_error, kRbBandLo, kRbBandHi);
  report(7, "RB pipeline", pass,
         format("injected %.3f -> %.5f; standard %.4e/gate; interleaved %.4e +- %.1e; "
                "band %.1e-%.1e; gate model error %.4e",
                kInjectedEpc, dep.error_per_clifford, std_rb.error_per_gate, irb.gate_error,
                irb.gate_error_stderr, kRbBandLo, kRbBandHi, model));
}

void purity(const Setup& s) {
  PurityOptions po;
  const PurityResult dep = run_purity_rb(NoiseModel::depolarizing(kInjectedEpc), po);
  const double p = 1.0 - 4.0 / 3.0 * kInjectedEpc;
  double worst = 0.0;
  for (std::size_t i = 0; i < dep.lengths.size(); ++i)
    for (double v : dep.purity[i])
      worst = std::max(worst, std::abs(v - (0.75 * std::pow(p, 2 * dep.lengths[i]) + 0.25)));

  const PurityResult gate = run_purity_rb(NoiseModel::from_gate(s.gate_ptm), po);
  const double rel = std::abs(gate.purity_error - s.rb_error_per_gate) / s.rb_error_per_gate;
  report(8, "purity RB", worst <= kPurityExactTol && rel <= kPurityRelTol,
         format("depolarizing identity max dev %.1e; eps = %.4e vs standard RB %.4e (%.0f%%)", worst,
                gate.purity_error, s.rb_error_per_gate, 100 * rel));
}

void qpt(const Setup& s) {
  ReadoutModel ro;
  ro.fidelity = {kQptReadout1, kQptReadout2};
  const CMatrix ideal = ideal_gate(GateTarget::kISwap);
  const OperatorChannel channel = [&](const CMatrix& r) { return s.gate_ptm.apply(r); };
  double mean = 0.0, sq = 0.0, lo = 1.0, hi = 0.0;
  for (int k = 0; k < kQptRepetitions; ++k) {
    Rng rng(derive_seed(1, static_cast<std::uint64_t>(k)));
    const double f =
        process_tomography(channel, ideal, 9 * kQptShotsPerSetting, ro, rng).average_fidelity_mle;
    mean += f / kQptRepetitions;
    sq += f * f / kQptRepetitions;
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  const double sem = std::sqrt(std::max(0.0, sq - mean * mean) / kQptRepetitions);
  const double rb_fidelity = 1.0 - s.rb_error_per_gate;
  report(9, "process tomography", within(mean, kQptLo, kQptHi) && mean < rb_fidelity,
         format("MLE F = %.4f +- %.4f (mean of %d, range %.3f-%.3f), band %.2f-%.2f, RB gives %.4f",
                mean, sem, kQptRepetitions, lo, hi, kQptLo, kQptHi, rb_fidelity));
}

// Phase-insensitive key of a unitary: rotate the first sizeable entry real.
std::string phase_free_key(const CMatrix& u) {
  Complex ref = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k)
    if (std::abs(u(k)) > 1e-6) {
      ref = u(k);
      break;
    }
  const CMatrix v = u * (std::abs(ref) / ref);
  std::string key;
  for (Eigen::Index k = 0; k < v.size(); ++k)
    key += std::to_string(std::lround(v(k).real() * 1e6)) + ',' +
           std::to_string(std::lround(v(k).imag() * 1e6)) + ';';
  return key;
}

void cliffords() {
  const CMatrix i2 = CMatrix::Identity(2, 2);
  const std::vector<CMatrix> gens{kron(hadamard(), i2), kron(i2, hadamard()), kron(phase_gate(), i2),
                                  kron(i2, phase_gate()), iswap_unitary()};
  std::set<std::string> seen{phase_free_key(CMatrix::Identity(4, 4))};
  std::deque<CMatrix> frontier{CMatrix::Identity(4, 4)};
  while (!frontier.empty()) {
    const CMatrix u = frontier.front();
    frontier.pop_front();
    for (const CMatrix& g : gens) {
      CMatrix v = g * u;
      if (seen.insert(phase_free_key(v)).second) frontier.push_back(std::move(v));
    }
  }
  const auto& c2 = CliffordGroup::two_qubit();
  std::set<std::string> table;
  for (int i = 0; i < c2.size(); ++i) table.insert(phase_free_key(c2.unitary(i)));
  const double avg = c2.average_iswap_count();
  report(10, "Clifford structure",
         seen.size() == std::size_t{kCliffordOrder} && table == seen &&
             std::abs(avg - kIswapsPerClifford) <= kIswapsTol,
         format("closure %zu elements (table %s), %.4f iSWAPs per Clifford, target %.1f +- %.2f",
                seen.size(), table == seen ? "identical" : "differs", avg, kIswapsPerClifford,
                kIswapsTol));
}

void invariants(const Setup& s, const Clock& suite) {
  const Propagator& prop = s.propagator;
  const LabeledBasis& b = prop.basis();
  std::vector<std::string> failed;
  auto check = [&](const std::string& what, bool ok) {
    if (!ok) failed.push_back(what);
  };
  const int dim = prop.dimension();

  // Unitarity of the 183 ns pulse on every input.
  const CMatrix u = prop.evolve(s.gate.pulse, CMatrix(CMatrix::Identity(dim, dim)));
  check("unitarity", (u.adjoint() * u - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff() < kInvariantTol);

  // No drive: the interaction-frame evolution is the identity.
  FluxPulse idle;
  idle.theta = s.device.bias;
  idle.delta = 0.0;
  idle.flat_duration = units::ns(100.0);
  const CMatrix id = prop.evolve(idle, CMatrix(CMatrix::Identity(dim, dim)));
  check("delta=0 identity", (id - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff() < kInvariantTol);

  // T1 and T2 against exponentials.
  auto ket = [&](BareLabel l) {
    CVector v = CVector::Zero(dim);
    v[b.index(l)] = 1.0;
    return v;
  };
  const double t1 = s.device.params.t1[0], t2 = s.device.params.t2[0];
  FluxPulse wait = idle;
  wait.flat_duration = t1 - 2 * wait.edge_duration();
  const auto r1 = propagate_lindblad(prop, wait, s.lindblad, DensityState::pure(b.space(), ket({1, 0, 0})));
  check("T1 decay", std::abs(r1.populations.back()[2] - std::exp(-1.0)) < kDecayTol);
  wait.flat_duration = t2 - 2 * wait.edge_duration();
  const CVector plus = (ket({0, 0, 0}) + ket({1, 0, 0})) / std::sqrt(2.0);
  const auto r2 = propagate_lindblad(prop, wait, s.lindblad, DensityState::pure(b.space(), plus));
  check("T2 decay",
        std::abs(std::abs((*r2.density)(b.index({0, 0, 0}), b.index({1, 0, 0}))) - 0.5 * std::exp(-1.0)) <
            kDecayTol);

  // Trace and positivity through the noisy gate.
  const CMatrix mixed = CMatrix::Identity(dim, dim) / dim;
  const auto r3 = propagate_lindblad(prop, s.gate.pulse, s.lindblad, DensityState(b.space(), mixed));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(*r3.density);
  check("trace", std::abs(r3.density->trace().real() - 1.0) < kInvariantTol);
  check("positivity", es.eigenvalues().minCoeff() > -kInvariantTol);

  // Fit round trip on exact decay data.
  std::vector<std::pair<double, double>> pts;
  for (int m : {1, 2, 4, 8, 16, 32, 64}) pts.emplace_back(m, 0.75 * std::pow(0.98, m) + 0.25);
  const DecayFit fit = fit_decay(pts);
  check("fit round trip", std::abs(fit.alpha - 0.98) < kInvariantTol && std::abs(fit.a - 0.75) < kInvariantTol &&
                              std::abs(fit.b - 0.25) < kInvariantTol);

  // Tomography round trip at infinite shots.
  CMatrix rho = s.gate_ptm.apply(CMatrix(CMatrix::Identity(4, 4) / 4.0 + 0.1 * pauli_string(5, 2)));
  rho /= rho.trace();  // the gate leaks a little; tomography sees a normalized state
  Rng rng(1);
  const auto st = state_tomography(rho, 0, ReadoutModel{}, rng);
  check("tomography round trip", (st.linear - rho).cwiseAbs().maxCoeff() < kInvariantTol);

  const double elapsed = suite.seconds();
  check("suite time budget", elapsed < kSuiteBudgetSeconds);
  std::string detail = failed.empty() ? "unitarity, delta=0, T1/T2, trace, positivity, fit and "
                                        "tomography round trips all within tolerance"
                                      : "failed:";
  for (const auto& f : failed) detail += " " + f;
  detail += format("; acceptance run %.0f s so far (full unit suite runs under ctest)", elapsed);
  report(11, "numerical invariants", failed.empty(), detail);
}

}  // namespace

int main() {
  const Clock clock;
  set_thread_count(0);
  try {
    Setup s(load_device_config(TBUS_SOURCE_DIR "/configs/reference_device.cfg"));
    const std::vector<std::function<void()>> steps{
        [&] { static_zz(s); },       [&] { dressed_detuning(s); }, [&] { chevron(s); },
        [&] { gate_scan(s); },       [&] { bell(s); },             [&] { rb(s); },
        [&] { purity(s); },          [&] { qpt(s); },              [&] { cliffords(); },
        [&] { invariants(s, clock); }};
    for (const auto& step : steps) step();
  } catch (const std::exception& e) {
    std::printf("aborted: %s\n", e.what());
    return 2;
  }

  std::set<int> failing;
  for (const auto& l : g_lines)
    if (!l.pass) failing.insert(l.id);
  std::printf("\n%zu/%zu criteria pass in %.0f s.", g_lines.size() - failing.size(), g_lines.size(),
              clock.seconds());
  if (failing == kKnownFailures) {
    std::printf(" Failing set matches the documented known failures.\n");
    return 0;
  }
  std::printf(" Failing set differs from the documented known failures:");
  for (int id : failing) std::printf(" %d", id);
  std::printf(" (expected");
  for (int id : kKnownFailures) std::printf(" %d", id);
  std::printf(")\n");
  return 1;
}
