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

#include "tbus/cliffords.hpp"

#include <bit>
#include <cmath>
#include <deque>
#include <numbers>

#include <nlohmann/json.hpp>

#include "tbus/errors.hpp"
#include "tbus/random.hpp"

namespace tbus {

PauliOperator multiply(const PauliOperator& a, const PauliOperator& b) {
  const int flips = std::popcount(static_cast<unsigned>(a.z & b.x));
  return {static_cast<std::uint8_t>(a.x ^ b.x), static_cast<std::uint8_t>(a.z ^ b.z),
          static_cast<std::uint8_t>((a.phase + b.phase + 2 * flips) & 3)};
}

CMatrix to_matrix(const PauliOperator& p, int num_qubits) {
  CMatrix x(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  z << 1, 0, 0, -1;
  CMatrix out = CMatrix::Identity(1, 1);
  for (int q = 0; q < num_qubits; ++q) {
    CMatrix f = CMatrix::Identity(2, 2);
    if ((p.x >> q) & 1) f = f * x;
    if ((p.z >> q) & 1) f = f * z;
    out = kron(out, f);
  }
  static const std::array<Complex, 4> kPhases{1.0, kI, -1.0, -kI};
  return kPhases[p.phase & 3] * out;
}

Tableau::Tableau(int num_qubits) : n_(num_qubits) {
  if (n_ != 1 && n_ != 2) throw ConfigError("Tableau: one or two qubits supported");
  for (int q = 0; q < n_; ++q) {
    images_[2 * q] = {static_cast<std::uint8_t>(1u << q), 0, 0};
    images_[2 * q + 1] = {0, static_cast<std::uint8_t>(1u << q), 0};
  }
}

PauliOperator Tableau::conjugate(const PauliOperator& p) const {
  PauliOperator out{0, 0, p.phase};
  for (int q = 0; q < n_; ++q) {
    if ((p.x >> q) & 1) out = multiply(out, images_[2 * q]);
    if ((p.z >> q) & 1) out = multiply(out, images_[2 * q + 1]);
  }
  return out;
}

Tableau Tableau::then(const Tableau& next) const {
  if (next.n_ != n_) throw ConfigError("Tableau: qubit count mismatch");
  Tableau out(n_);
  for (int g = 0; g < 2 * n_; ++g) out.images_[g] = next.conjugate(images_[g]);
  return out;
}

std::uint32_t Tableau::key() const {
  std::uint32_t k = 0;
  for (int g = 0; g < 2 * n_; ++g) {
    const PauliOperator& p = images_[g];
    const int ys = std::popcount(static_cast<unsigned>(p.x & p.z));
    const std::uint32_t sign = static_cast<std::uint32_t>(((p.phase - ys) & 3) >> 1);
    const std::uint32_t bits = (static_cast<std::uint32_t>(p.x) << (n_ + 1)) |
                               (static_cast<std::uint32_t>(p.z) << 1) | sign;
    k = (k << (2 * n_ + 1)) | bits;
  }
  return k;
}

Tableau Tableau::from_unitary(const CMatrix& u) {
  const int n = u.rows() == 2 ? 1 : u.rows() == 4 ? 2 : 0;
  if (n == 0 || u.cols() != u.rows()) throw ConfigError("Tableau: expected a 2x2 or 4x4 unitary");
  const double d = static_cast<double>(u.rows());
  Tableau t(n);
  for (int g = 0; g < 2 * n; ++g) {
    const CMatrix image = u * to_matrix(t.images_[g], n) * u.adjoint();
    bool found = false;
    for (std::uint8_t x = 0; x < (1u << n) && !found; ++x)
      for (std::uint8_t z = 0; z < (1u << n) && !found; ++z) {
        const Complex c = (to_matrix({x, z, 0}, n).adjoint() * image).trace() / d;
        if (std::abs(std::abs(c) - 1.0) > 1e-8) continue;
        const double angle = std::arg(c) / (0.5 * std::numbers::pi);
        const long k = std::lround(angle);
        if (std::abs(angle - static_cast<double>(k)) > 1e-6) continue;
        t.images_[g] = {x, z, static_cast<std::uint8_t>(((k % 4) + 4) % 4)};
        found = true;
      }
    if (!found) throw ConfigError("Tableau: unitary is not a Clifford");
  }
  return t;
}

CMatrix hadamard() {
  CMatrix h(2, 2);
  h << 1, 1, 1, -1;
  return h / std::numbers::sqrt2;
}

CMatrix phase_gate() {
  CMatrix s = CMatrix::Identity(2, 2);
  s(1, 1) = kI;
  return s;
}

CMatrix iswap_unitary() {
  CMatrix u = CMatrix::Zero(4, 4);
  u(0, 0) = u(3, 3) = 1.0;
  u(1, 2) = u(2, 1) = -kI;
  return u;
}

// ---------------------------------------------------------------------------

CliffordGroup::CliffordGroup(int n) : n_(n) {}

const CliffordGroup& CliffordGroup::one_qubit() {
  static const CliffordGroup g = [] {
    CliffordGroup c(1);
    c.enumerate({hadamard(), phase_gate()});
    return c;
  }();
  return g;
}

const CliffordGroup& CliffordGroup::two_qubit() {
  static const CliffordGroup g = [] {
    CliffordGroup c(2);
    const CMatrix id = CMatrix::Identity(2, 2);
    c.enumerate({kron(hadamard(), id), kron(phase_gate(), id), kron(id, hadamard()),
                 kron(id, phase_gate()), iswap_unitary()});
    c.build_decompositions();
    return c;
  }();
  return g;
}

const CliffordGroup& CliffordGroup::for_qubits(int n) {
  if (n == 1) return one_qubit();
  if (n == 2) return two_qubit();
  throw ConfigError("Clifford group: n must be 1 or 2");
}

void CliffordGroup::enumerate(const std::vector<CMatrix>& generators) {
  lookup_.assign(std::size_t{1} << (n_ == 1 ? 6 : 20), -1);
  std::vector<Tableau> gen_tableaux;
  for (const auto& g : generators) gen_tableaux.push_back(Tableau::from_unitary(g));
  const int d = 1 << n_;
  tableaux_.push_back(Tableau(n_));
  unitaries_.push_back(CMatrix::Identity(d, d));
  lookup_[tableaux_[0].key()] = 0;
  for (std::size_t i = 0; i < tableaux_.size(); ++i) {
    for (std::size_t g = 0; g < generators.size(); ++g) {
      Tableau t = tableaux_[i].then(gen_tableaux[g]);
      const std::uint32_t k = t.key();
      if (lookup_[k] >= 0) continue;
      lookup_[k] = static_cast<std::int32_t>(tableaux_.size());
      unitaries_.push_back(generators[g] * unitaries_[i]);
      tableaux_.push_back(std::move(t));
    }
  }
  inverses_.resize(tableaux_.size());
  for (std::size_t i = 0; i < tableaux_.size(); ++i)
    inverses_[i] = index_of_unitary(unitaries_[i].adjoint());
}

std::optional<int> CliffordGroup::find(const Tableau& t) const {
  if (t.num_qubits() != n_) return std::nullopt;
  const std::int32_t idx = lookup_[t.key()];
  if (idx < 0) return std::nullopt;
  return idx;
}

int CliffordGroup::index_of_unitary(const CMatrix& u) const {
  if (auto i = find(Tableau::from_unitary(u))) return *i;
  throw NumericalError("cliffords", "unitary is not in the enumerated group");
}

int CliffordGroup::compose(int first, int second) const {
  return lookup_[tableaux_.at(first).then(tableaux_.at(second)).key()];
}

void CliffordGroup::build_decompositions() {
  const CliffordGroup& c1 = one_qubit();
  const int m = c1.size();
  iswap_counts_.assign(tableaux_.size(), -1);
  decompositions_.assign(tableaux_.size(), {});
  std::vector<int> frontier;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const int e = index_of_unitary(kron(c1.unitary(a), c1.unitary(b)));
      if (iswap_counts_[e] >= 0) continue;
      iswap_counts_[e] = 0;
      decompositions_[e] = {DecompositionStep{false, a, b}};
      frontier.push_back(e);
    }
  const int swap = iswap_element();
  std::vector<int> locals;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) locals.push_back(local_element(a, b));
  for (int level = 1; !frontier.empty(); ++level) {
    std::vector<int> next;
    for (int e : frontier) {
      const int through = compose(e, swap);
      for (int l = 0; l < m * m; ++l) {
        const int target = compose(through, locals[l]);
        if (iswap_counts_[target] >= 0) continue;
        iswap_counts_[target] = level;
        auto steps = decompositions_[e];
        steps.push_back(DecompositionStep{true, 0, 0});
        steps.push_back(DecompositionStep{false, l / m, l % m});
        decompositions_[target] = std::move(steps);
        next.push_back(target);
      }
    }
    frontier = std::move(next);
  }
  for (int c : iswap_counts_)
    if (c < 0) throw NumericalError("cliffords", "decomposition search left elements unreached");
}

int CliffordGroup::iswap_element() const {
  if (n_ != 2) throw ConfigError("iSWAP needs the two-qubit group");
  return index_of_unitary(iswap_unitary());
}

int CliffordGroup::local_element(int c1_first, int c1_second) const {
  if (n_ != 2) throw ConfigError("local layers need the two-qubit group");
  const CliffordGroup& c1 = one_qubit();
  return index_of_unitary(kron(c1.unitary(c1_first), c1.unitary(c1_second)));
}

int CliffordGroup::iswap_count(int i) const {
  if (n_ != 2) throw ConfigError("iSWAP counts need the two-qubit group");
  return iswap_counts_.at(i);
}

const std::vector<DecompositionStep>& CliffordGroup::decomposition(int i) const {
  if (n_ != 2) throw ConfigError("decompositions need the two-qubit group");
  return decompositions_.at(i);
}

double CliffordGroup::average_iswap_count() const {
  double sum = 0.0;
  for (int i = 0; i < size(); ++i) sum += iswap_count(i);
  return sum / size();
}

std::vector<int> CliffordGroup::iswap_class_sizes() const {
  std::vector<int> sizes;
  for (int i = 0; i < size(); ++i) {
    const int c = iswap_count(i);
    if (static_cast<int>(sizes.size()) <= c) sizes.resize(c + 1, 0);
    ++sizes[c];
  }
  return sizes;
}

CMatrix recompose(const std::vector<DecompositionStep>& steps) {
  const CliffordGroup& c1 = CliffordGroup::one_qubit();
  const CMatrix swap = iswap_unitary();
  CMatrix u = CMatrix::Identity(4, 4);
  for (const auto& s : steps)
    u = (s.iswap ? swap : kron(c1.unitary(s.q1), c1.unitary(s.q2))) * u;
  return u;
}

double phase_insensitive_overlap(const CMatrix& u, const CMatrix& v) {
  const double d = static_cast<double>(u.rows());
  return std::norm((u.adjoint() * v).trace()) / (d * d);
}

std::vector<int> sample_rb_sequence(const CliffordGroup& group, int length, std::uint64_t seed,
                                    std::optional<int> interleave) {
  if (length < 1) throw ConfigError("RB sequence length must be at least 1");
  if (interleave && (*interleave < 0 || *interleave >= group.size()))
    throw ConfigError("interleaved element is not in the group");
  Rng rng(seed);
  std::vector<int> seq;
  seq.reserve(static_cast<std::size_t>(interleave ? 2 * length + 1 : length + 1));
  int total = group.identity();
  for (int k = 0; k < length; ++k) {
    const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(group.size())));
    seq.push_back(c);
    total = group.compose(total, c);
    if (interleave) {
      seq.push_back(*interleave);
      total = group.compose(total, *interleave);
    }
  }
  seq.push_back(group.inverse(total));
  return seq;
}

std::string sequence_to_json(const CliffordGroup& group, const std::vector<int>& sequence,
                             std::uint64_t seed, int length, std::optional<int> interleave) {
  nlohmann::json j;
  j["num_qubits"] = group.num_qubits();
  j["seed"] = seed;
  j["length"] = length;
  j["interleave"] = interleave ? nlohmann::json(*interleave) : nlohmann::json(nullptr);
  j["elements"] = sequence;
  return j.dump();
}

}  // namespace tbus
