#include <gtest/gtest.h>

#include <array>
#include <boost/math/distributions/chi_squared.hpp>
#include <random>

#include "oracle.hpp"
#include "qemul/circuits.hpp"
#include "qemul/parallel.hpp"
#include "qemul/simulator.hpp"

using namespace qemul;

namespace {

Circuit bell() {
  Circuit c(2, 2);
  c.h(0).cx(0, 1);
  return c;
}

Circuit random_unitary_circuit(int n, int depth, std::mt19937_64& rng) {
  Circuit c(n, n);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_int_distribution<int> kind(0, 7);
  std::uniform_int_distribution<int> qd(0, n - 1);
  for (int i = 0; i < depth; ++i) {
    const int a = qd(rng);
    int b = qd(rng);
    if (n > 1 && b == a) b = (a + 1) % n;
    const int k = n == 1 ? std::array<int, 5>{0, 2, 4, 6, 7}[static_cast<std::size_t>(kind(rng) % 5)] : kind(rng);
    switch (k) {
      case 0: c.u(a, ang(rng), ang(rng), ang(rng)); break;
      case 1: c.cx(a, b); break;
      case 2: c.r(a, ang(rng), ang(rng)); break;
      case 3: c.rxx(a, b, ang(rng)); break;
      case 4: c.ry(a, ang(rng)); break;
      case 5: c.rzz(a, b, ang(rng)); break;
      case 6: c.rz(a, ang(rng)); break;
      default: c.rx(a, ang(rng)); break;
    }
  }
  return c;
}

double chi_square_pvalue(const CountsHistogram& h, const std::vector<double>& p, int width) {
  double stat = 0.0;
  int bins = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 1e-12) {
      EXPECT_EQ(h.counts.count(to_bitstring(i, width)), 0u);
      continue;
    }
    const double expected = p[i] * static_cast<double>(h.shots);
    const auto it = h.counts.find(to_bitstring(i, width));
    const double observed = it == h.counts.end() ? 0.0 : static_cast<double>(it->second);
    stat += (observed - expected) * (observed - expected) / expected;
    ++bins;
  }
  if (bins < 2) return 1.0;
  boost::math::chi_squared dist(bins - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace

TEST(Core, InitState) {
  const StateVector s1 = init_state(1);
  EXPECT_EQ(s1.dim(), 2u);
  EXPECT_EQ(s1[0], cplx(1, 0));
  EXPECT_EQ(s1[1], cplx(0, 0));
  const StateVector s3 = init_state(3);
  EXPECT_EQ(s3.dim(), 8u);
  EXPECT_EQ(s3[0], cplx(1, 0));
  EXPECT_THROW(init_state(30), CapacityError);
}

TEST(Core, GateExamples) {
  StateVector s = init_state(1);
  apply_instruction(s, {GateKind::U, {0}, {}, {kPi, 0, kPi}});
  EXPECT_NEAR(std::abs(s[1]), 1.0, 1e-15);

  StateVector r = init_state(2);
  apply_instruction(r, {GateKind::RXX, {0, 1}, {}, {kPi / 4}});
  EXPECT_NEAR(std::abs(r[0] - cplx(1 / std::sqrt(2.0), 0)), 0, 1e-15);
  EXPECT_NEAR(std::abs(r[3] - cplx(0, -1 / std::sqrt(2.0))), 0, 1e-15);

  const StateVector b = final_state(bell());
  EXPECT_NEAR(std::abs(b[0] - 1 / std::sqrt(2.0)), 0, 1e-15);
  EXPECT_NEAR(std::abs(b[3] - 1 / std::sqrt(2.0)), 0, 1e-15);
  EXPECT_THROW(apply_instruction(s, {GateKind::Measure, {0}, {0}, {}}), ValidationError);
}

TEST(Core, KernelMatricesMatchTextbookDefinitions) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int i = 0; i < 20; ++i) {
    const double t = ang(rng), f = ang(rng), l = ang(rng);
    EXPECT_LT((to_eigen(u_matrix(t, f, l)) - oracle::gate(GateKind::U, {t, f, l})).norm(), 1e-14);
    EXPECT_LT((to_eigen(r_matrix(t, f)) - oracle::gate(GateKind::R, {t, f})).norm(), 1e-14);
    EXPECT_LT((to_eigen(rx_matrix(t)) - oracle::gate(GateKind::RX, {t})).norm(), 1e-14);
    EXPECT_LT((to_eigen(ry_matrix(t)) - oracle::gate(GateKind::RY, {t})).norm(), 1e-14);
    EXPECT_LT((to_eigen(rz_matrix(t)) - oracle::gate(GateKind::RZ, {t})).norm(), 1e-14);
    EXPECT_LT((to_eigen(rxx_matrix(t)) - oracle::gate(GateKind::RXX, {t})).norm(), 1e-14);
    EXPECT_LT((to_eigen(rzz_matrix(t)) - oracle::gate(GateKind::RZZ, {t})).norm(), 1e-14);
  }
}

TEST(Core, NormPreservedAndMatchesDenseOracle) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 5;
    const Circuit c = random_unitary_circuit(n, 30, rng);
    const StateVector s = final_state(c);
    EXPECT_NEAR(s.norm_squared(), 1.0, 1e-10);
    const oracle::M u = oracle::circuit(c);
    for (std::size_t i = 0; i < s.dim(); ++i) EXPECT_LT(std::abs(s[i] - u(static_cast<Eigen::Index>(i), 0)), 1e-10);
  }
}

TEST(Core, ApplyMatrixGeneralTargets) {
  std::mt19937_64 rng(4);
  const CMat g = haar_unitary(8, rng);
  std::vector<cplx> flat;
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) flat.push_back(g(r, c));
  const Circuit prep = random_unitary_circuit(4, 20, rng);
  StateVector s = final_state(prep);
  const std::vector<int> targets{2, 0, 3};
  s.apply_matrix(flat, targets);
  const oracle::M expect = oracle::embed(g, targets, 4) * oracle::circuit(prep).col(0);
  for (std::size_t i = 0; i < s.dim(); ++i) EXPECT_LT(std::abs(s[i] - expect(static_cast<Eigen::Index>(i), 0)), 1e-12);
}

TEST(Core, MeasureQubit) {
  Rng rng(1);
  StateVector one = init_state(1);
  one.apply_x(0);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(measure_qubit(one, 0, rng), 1);

  int zeros = 0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    StateVector plus = init_state(1);
    apply_instruction(plus, {GateKind::U, {0}, {}, {kPi / 2, 0, kPi}});
    zeros += measure_qubit(plus, 0, rng) == 0;
  }
  EXPECT_NEAR(zeros / static_cast<double>(trials), 0.5, 3 * std::sqrt(0.25 / trials));

  for (int i = 0; i < 200; ++i) {
    StateVector b = final_state(bell());
    const int a = measure_qubit(b, 0, rng);
    EXPECT_EQ(measure_qubit(b, 1, rng), a);
  }
}

TEST(Core, RunShotExamples) {
  Rng rng(2);
  const Circuit bv = bernstein_vazirani("101");
  for (int i = 0; i < 20; ++i) EXPECT_EQ(run_shot(bv, nullptr, rng), "101");
  EXPECT_EQ(run_shot(Circuit(2, 2), nullptr, rng), "00");

  // Mid-circuit measurement forces trajectories; reset returns the qubit to |0>.
  Circuit c(1, 2);
  c.x(0).measure(0, 0).reset(0).measure(0, 1);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(run_shot(c, nullptr, rng), "01");
}

TEST(Core, BellSamplingAndDeterminism) {
  Circuit b = bell();
  b.measure_all();
  const CountsHistogram h = sample(b, 100000, nullptr, 9);
  EXPECT_EQ(h.shots, 100000);
  std::int64_t total = 0;
  for (const auto& [k, v] : h.counts) {
    EXPECT_TRUE(k == "00" || k == "11");
    total += v;
  }
  EXPECT_EQ(total, 100000);
  EXPECT_NEAR(h.frequency("00"), 0.5, 3 * std::sqrt(0.25 / 100000));
  EXPECT_EQ(sample(b, 100000, nullptr, 9), h);

  const CountsHistogram g = sample(ghz(3), 1000, nullptr, 1);
  for (const auto& [k, v] : g.counts) EXPECT_TRUE(k == "000" || k == "111");
}

TEST(Core, ResultsIndependentOfThreadCount) {
  std::mt19937_64 rng(8);
  Circuit c = random_unitary_circuit(3, 15, rng);
  Circuit mid(3, 3);
  mid.append(c);
  mid.measure(0, 0).h(0).measure(0, 1).measure(2, 2);  // non-terminal: trajectory path
  const int saved = num_threads();
  set_num_threads(1);
  const CountsHistogram a = sample(mid, 5000, nullptr, 3);
  set_num_threads(4);
  const CountsHistogram b = sample(mid, 5000, nullptr, 3);
  set_num_threads(saved);
  EXPECT_EQ(a, b);
}

TEST(Core, ProbabilitiesExamples) {
  const Distribution d = probabilities(bell());
  EXPECT_NEAR(d[0], 0.5, 1e-15);
  EXPECT_NEAR(d[3], 0.5, 1e-15);
  EXPECT_NEAR(d[1] + d[2], 0.0, 1e-15);
  const Distribution e = probabilities(Circuit(2, 0));
  EXPECT_EQ(e.probabilities, (std::vector<double>{1, 0, 0, 0}));
}

TEST(Core, SamplingMatchesProbabilitiesChiSquare) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 4; ++trial) {
    Circuit c = random_unitary_circuit(3, 12, rng);
    const Distribution d = probabilities(c);
    c.measure_all();
    const CountsHistogram fast = sample(c, 100000, nullptr, 100 + trial);
    EXPECT_GT(chi_square_pvalue(fast, d.probabilities, 3), 1e-3);
    // A gate after a measurement disables the fast path; the result must not change.
    Circuit traj = c;
    traj.n_clbits = 4;
    traj.rz(0, 0.0).measure(0, 3);
    const CountsHistogram slow = sample(traj, 100000, nullptr, 200 + trial);
    CountsHistogram low;
    low.shots = slow.shots;
    for (const auto& [k, v] : slow.counts) low.counts[k.substr(1)] += v;
    EXPECT_GT(chi_square_pvalue(low, d.probabilities, 3), 1e-3);
  }
}

TEST(Core, ExpectationPauli) {
  EXPECT_NEAR(expectation_pauli(init_state(1), "Z"), 1.0, 1e-15);
  StateVector plus = init_state(1);
  apply_instruction(plus, {GateKind::U, {0}, {}, {kPi / 2, 0, kPi}});
  EXPECT_NEAR(expectation_pauli(plus, "X"), 1.0, 1e-15);
  const StateVector b = final_state(bell());
  EXPECT_NEAR(expectation_pauli(b, "ZZ"), 1.0, 1e-15);
  EXPECT_NEAR(expectation_pauli(b, "XX"), 1.0, 1e-15);
  EXPECT_NEAR(expectation_pauli(b, "ZI"), 0.0, 1e-15);
  EXPECT_THROW(expectation_pauli(b, "ZQ"), ValidationError);
  EXPECT_THROW(expectation_pauli(b, "Z"), ValidationError);

  std::mt19937_64 rng(31);
  const std::string letters = "IXYZ";
  for (int trial = 0; trial < 30; ++trial) {
    const Circuit c = random_unitary_circuit(3, 20, rng);
    std::string p;
    for (int k = 0; k < 3; ++k) p += letters[rng() % 4];
    const oracle::M psi = oracle::circuit(c).col(0);
    const double expect = (psi.adjoint() * oracle::pauli_string(p) * psi)(0, 0).real();
    EXPECT_NEAR(expectation_pauli(final_state(c), p), expect, 1e-10) << p;
  }
}

TEST(Core, CountsJsonRoundTrip) {
  Circuit b = bell();
  b.measure_all();
  const CountsHistogram h = sample(b, 1000, nullptr, 4);
  EXPECT_EQ(CountsHistogram::from_json(h.to_json()), h);
  auto bad = h.to_json();
  bad["shots"] = 999;
  EXPECT_THROW(CountsHistogram::from_json(bad), ValidationError);
}
