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

// Shared numerics: Pauli algebra, RNG, optimizers, thread pool, config files.

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "support.hpp"
#include "tbus/config.hpp"
#include "tbus/errors.hpp"
#include "tbus/optimize.hpp"
#include "tbus/parallel.hpp"
#include "tbus/pauli.hpp"
#include "tbus/random.hpp"

namespace tbus {
namespace {

// --- Pauli ---------------------------------------------------------------------------

TEST(Pauli, StringsAreKroneckerProductsFirstQubitMostSignificant) {
  const CMatrix x = pauli_matrix(1), z = pauli_matrix(3);
  CMatrix xz = CMatrix::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) xz.block(2 * a, 2 * b, 2, 2) = x(a, b) * z;
  EXPECT_LT((pauli_string(4 * 1 + 3, 2) - xz).norm(), 1e-15);
  EXPECT_EQ(pauli_label(4 * 1 + 3, 2), "XZ");
  EXPECT_EQ(pauli_label(2, 1), "Y");
}

TEST(Pauli, OrthogonalUnderHilbertSchmidt) {
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      const Complex ip = (pauli_string(i, 2).adjoint() * pauli_string(j, 2)).trace();
      EXPECT_NEAR(std::abs(ip - Complex(i == j ? 4.0 : 0.0)), 0.0, 1e-14);
    }
}

TEST(Pauli, VectorRoundTrip) {
  std::mt19937_64 gen(1);
  const CMatrix rho = testing::random_density(4, gen);
  const RVector v = pauli_vector(rho);
  EXPECT_NEAR(v[0], 1.0, 1e-14);
  EXPECT_LT((from_pauli_vector(v) - rho).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Ptm, UnitaryPtmIsOrthogonalAndMatchesConjugation) {
  std::mt19937_64 gen(2);
  const CMatrix u = testing::random_unitary(4, gen);
  const auto r = PauliTransferMatrix::from_unitary(u);
  EXPECT_LT((r.matrix().transpose() * r.matrix() - RMatrix::Identity(16, 16)).norm(), 1e-12);
  EXPECT_TRUE(r.is_trace_preserving());
  const CMatrix rho = testing::random_density(4, gen);
  EXPECT_LT((r.apply(rho) - u * rho * u.adjoint()).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_NEAR(r.process_fidelity(u), 1.0, 1e-12);
}

TEST(Ptm, ChannelConstructionMatchesUnitaryConstruction) {
  std::mt19937_64 gen(3);
  const CMatrix u = testing::random_unitary(4, gen);
  const auto a = PauliTransferMatrix::from_unitary(u);
  const auto b = PauliTransferMatrix::from_channel(
      [&](const CMatrix& m) { return CMatrix(u * m * u.adjoint()); }, 2);
  EXPECT_LT((a.matrix() - b.matrix()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Ptm, ThenComposesInApplicationOrder) {
  std::mt19937_64 gen(4);
  const CMatrix u = testing::random_unitary(4, gen), v = testing::random_unitary(4, gen);
  const auto uv = PauliTransferMatrix::from_unitary(u).then(PauliTransferMatrix::from_unitary(v));
  EXPECT_LT((uv.matrix() - PauliTransferMatrix::from_unitary(v * u).matrix()).norm(), 1e-12);
}

TEST(Ptm, DepolarizingIsDiagonal) {
  const auto d = PauliTransferMatrix::depolarizing(0.9, 2);
  RMatrix expected = 0.9 * RMatrix::Identity(16, 16);
  expected(0, 0) = 1.0;
  EXPECT_LT((d.matrix() - expected).norm(), 1e-15);
  // Process fidelity of p-depolarizing: (1 + 15p) / 16.
  EXPECT_NEAR(d.process_fidelity(PauliTransferMatrix::identity(2)), (1 + 15 * 0.9) / 16, 1e-14);
  EXPECT_NEAR(d.trace_retention(), 1.0, 1e-15);
}

TEST(Ptm, RejectsWrongShape) {
  EXPECT_THROW(PauliTransferMatrix(RMatrix::Identity(5, 5)), ConfigError);
}

// --- RNG -----------------------------------------------------------------------------

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, DerivedSeedsDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 50; ++a)
    for (std::uint64_t b = 0; b < 50; ++b) seen.insert(derive_seed(7, a, b));
  EXPECT_EQ(seen.size(), 2500u);
  EXPECT_EQ(derive_seed(7, 3, 4), derive_seed(7, 3, 4));
  EXPECT_NE(derive_seed(7, 3, 4), derive_seed(8, 3, 4));
}

TEST(Rng, BelowIsUniform) {
  Rng r(5);
  constexpr int kBins = 7, kDraws = 70000;
  std::array<int, kBins> h{};
  for (int i = 0; i < kDraws; ++i) ++h[r.below(kBins)];
  const double mean = double(kDraws) / kBins, sd = std::sqrt(mean * (1 - 1.0 / kBins));
  for (int c : h) EXPECT_LT(std::abs(c - mean), 5 * sd);
  EXPECT_THROW(r.below(0), ConfigError);
}

TEST(Rng, MomentsOfContinuousAndBinomialDraws) {
  Rng r(6);
  constexpr int kN = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < kN; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / kN, 0.5, 5 * std::sqrt(1.0 / 12 / kN));
  EXPECT_NEAR(sn / kN, 0.0, 5 / std::sqrt(double(kN)));
  EXPECT_NEAR(sn2 / kN, 1.0, 5 * std::sqrt(2.0 / kN));
  double sb = 0;
  constexpr int kB = 2000;
  for (int i = 0; i < kB; ++i) sb += double(r.binomial(100, 0.3));
  EXPECT_NEAR(sb / kB, 30.0, 5 * std::sqrt(21.0 / kB));
  EXPECT_EQ(r.binomial(10, 0.0), 0u);
  EXPECT_EQ(r.binomial(10, 1.0), 10u);
}

// --- optimizers ----------------------------------------------------------------------

TEST(LevenbergMarquardt, RecoversExponentialExactly) {
  std::vector<double> x, y;
  for (int i = 0; i < 12; ++i) {
    x.push_back(i);
    y.push_back(0.7 * std::exp(-0.3 * i) + 0.2);
  }
  const auto res = levenberg_marquardt(
      [&](const RVector& p) {
        RVector r(static_cast<Eigen::Index>(x.size()));
        for (std::size_t i = 0; i < x.size(); ++i)
          r[static_cast<Eigen::Index>(i)] = p[0] * std::exp(-p[1] * x[i]) + p[2] - y[i];
        return r;
      },
      (RVector(3) << 1.0, 0.1, 0.0).finished());
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.x[0], 0.7, 1e-8);
  EXPECT_NEAR(res.x[1], 0.3, 1e-8);
  EXPECT_NEAR(res.x[2], 0.2, 1e-8);
  EXPECT_LT(res.cost, 1e-18);
}

TEST(LevenbergMarquardt, RosenbrockAsResiduals) {
  const auto res = levenberg_marquardt(
      [](const RVector& p) {
        return (RVector(2) << 10 * (p[1] - p[0] * p[0]), 1 - p[0]).finished();
      },
      (RVector(2) << -1.2, 1.0).finished());
  EXPECT_NEAR(res.x[0], 1.0, 1e-8);
  EXPECT_NEAR(res.x[1], 1.0, 1e-8);
}

TEST(LevenbergMarquardt, RespectsBounds) {
  LeastSquaresOptions o;
  o.lower = (RVector(1) << 2.0).finished();
  o.upper = (RVector(1) << 5.0).finished();
  // Unconstrained minimum at 0.
  const auto res = levenberg_marquardt([](const RVector& p) { return RVector(p); },
                                       (RVector(1) << 4.0).finished(), o);
  EXPECT_NEAR(res.x[0], 2.0, 1e-10);
}

TEST(LevenbergMarquardt, CovarianceMatchesLinearRegression) {
  // Straight line: covariance has a closed form s^2 (X^T X)^-1.
  const std::vector<double> x{0, 1, 2, 3, 4, 5}, y{0.1, 1.2, 1.9, 3.2, 3.9, 5.1};
  auto f = [&](const RVector& p) {
    RVector r(6);
    for (int i = 0; i < 6; ++i) r[i] = p[0] + p[1] * x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)];
    return r;
  };
  const auto res = levenberg_marquardt(f, RVector::Zero(2));
  RMatrix xm(6, 2);
  RVector yv(6);
  for (int i = 0; i < 6; ++i) {
    xm(i, 0) = 1;
    xm(i, 1) = x[static_cast<std::size_t>(i)];
    yv[i] = y[static_cast<std::size_t>(i)];
  }
  const RVector beta = (xm.transpose() * xm).ldlt().solve(xm.transpose() * yv);
  const double s2 = (xm * beta - yv).squaredNorm() / 4;
  const RMatrix cov = s2 * (xm.transpose() * xm).inverse();
  EXPECT_NEAR(res.x[0], beta[0], 1e-9);
  EXPECT_NEAR(res.x[1], beta[1], 1e-9);
  EXPECT_LT((res.covariance - cov).cwiseAbs().maxCoeff(), 1e-6 * cov.cwiseAbs().maxCoeff());
}

TEST(NelderMead, FindsQuadraticMinimum) {
  const auto res = nelder_mead(
      [](const RVector& p) { return std::pow(p[0] - 1.5, 2) + 3 * std::pow(p[1] + 0.5, 2); },
      RVector::Zero(2), RVector::Constant(2, 0.5));
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.x[0], 1.5, 1e-4);
  EXPECT_NEAR(res.x[1], -0.5, 1e-4);
  EXPECT_LT(res.value, 1e-8);
}

// --- thread pool ---------------------------------------------------------------------

class ThreadCount : public ::testing::Test {
 protected:
  void TearDown() override { set_thread_count(1); }
};

TEST_F(ThreadCount, EveryIndexVisitedOnce) {
  for (unsigned t : {1u, 3u, 8u}) {
    set_thread_count(t);
    EXPECT_EQ(thread_count(), t);
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST_F(ThreadCount, ZeroMeansAllCores) {
  set_thread_count(0);
  EXPECT_GE(thread_count(), 1u);
}

TEST_F(ThreadCount, ExceptionPropagates) {
  set_thread_count(4);
  EXPECT_THROW(parallel_for(100,
                            [](std::size_t i) {
                              if (i == 37) throw NumericalError("test", "boom");
                            }),
               NumericalError);
}

// --- key = value config --------------------------------------------------------------

KeyValueTable parse_text(const std::string& s) {
  std::istringstream in(s);
  return KeyValueTable::parse(in, "test.cfg");
}

TEST(KeyValue, ParsesCommentsListsAndOverrides) {
  auto t = parse_text("# header\n a = 1.5  # trailing\nname = iswap\nlist = 1, 2,4\n\n");
  EXPECT_DOUBLE_EQ(t.number("a"), 1.5);
  EXPECT_EQ(t.text("name", ""), "iswap");
  EXPECT_EQ(t.numbers("list", {}), (std::vector<double>{1, 2, 4}));
  EXPECT_EQ(t.integer("missing", 9), 9);
  t.set("a=2");
  EXPECT_DOUBLE_EQ(t.number("a"), 2.0);
  EXPECT_NO_THROW(t.reject_unused("ctx"));
}

TEST(KeyValue, ErrorsNameTheLineOrKey) {
  auto expect_msg = [](auto&& f, const std::string& needle) {
    try {
      f();
      ADD_FAILURE() << "no throw, wanted " << needle;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_msg([] { parse_text("a = 1\nnot an assignment\n"); }, "test.cfg:2");
  expect_msg([] { parse_text("a = 1\na = 2\n"); }, "test.cfg:2");
  expect_msg([] { parse_text("a = x\n").number("a"); }, "a");
  expect_msg([] { parse_text("a = 1.5\n").integer("a", 0); }, "a");
  expect_msg([] { parse_text("").number("needed"); }, "needed");
  expect_msg([] { parse_text("typo = 1\n").reject_unused("chevron"); }, "typo");
  expect_msg([] { KeyValueTable t; t.set("novalue"); }, "novalue");
}

TEST(DeviceConfig, FormatParseRoundTrip) {
  const DeviceConfig cfg = load_device_config(TBUS_SOURCE_DIR "/configs/reference_device.cfg");
  EXPECT_NEAR(cfg.bias, -0.108, 1e-15);
  const DeviceConfig again = parse_device_config(parse_text(format_device_config(cfg)));
  // Unit conversions cost the last bit or so; text is not a fixed point.
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::abs(b); };
  const auto& p = again.params;
  const auto& q = cfg.params;
  for (int k = 0; k < 2; ++k) {
    EXPECT_TRUE(close(p.omega_q[k], q.omega_q[k]));
    EXPECT_TRUE(close(p.alpha_q[k], q.alpha_q[k]));
    EXPECT_TRUE(close(p.g_q[k], q.g_q[k]));
    EXPECT_TRUE(close(p.t1[k], q.t1[k]));
    EXPECT_TRUE(close(p.t2[k], q.t2[k]));
  }
  EXPECT_TRUE(close(p.omega_tb0, q.omega_tb0));
  EXPECT_TRUE(close(p.alpha_tb, q.alpha_tb));
  EXPECT_DOUBLE_EQ(again.bias, cfg.bias);
}

TEST(DeviceConfig, SchemaAndFieldValidation) {
  const std::string good = format_device_config(load_device_config(TBUS_SOURCE_DIR "/configs/reference_device.cfg"));
  auto replace = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    const auto pos = s.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    s.replace(pos, s.find('\n', pos) - pos, to);
    return s;
  };
  EXPECT_THROW(parse_device_config(parse_text(replace("schema_version", "schema_version = 2"))), ConfigError);
  EXPECT_THROW(parse_device_config(parse_text(replace("q1.coupling_mhz", "q1.coupling_mhz = -5"))), ConfigError);
  EXPECT_THROW(parse_device_config(parse_text(good + "extra = 1\n")), ConfigError);
  EXPECT_THROW(load_device_config("/nonexistent/device.cfg"), ConfigError);
}

}  // namespace
}  // namespace tbus
