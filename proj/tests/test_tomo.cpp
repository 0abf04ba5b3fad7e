#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracle.hpp"
#include "qemul/tomo.hpp"

using namespace qemul;

namespace {

CMat pure(const CVec& v) { return v * v.adjoint(); }

CVec haar_state(int d, std::mt19937_64& rng) { return haar_unitary(d, rng).col(0); }

Circuit state_prep(const CVec& psi) {
  // Single-qubit preparation through the ZYZ decomposition of [psi, psi_perp].
  Eigen::Matrix2cd u;
  u.col(0) = psi;
  u.col(1) << -std::conj(psi(1)), std::conj(psi(0));
  const ZyzAngles z = zyz_decompose(u);
  Circuit c(1, 0);
  c.u(0, z.theta, z.phi, z.lambda);
  return c;
}

double min_eigenvalue(const CMat& m) { return Eigen::SelfAdjointEigenSolver<CMat>(m).eigenvalues()(0); }

void expect_density(const CMat& rho) {
  EXPECT_LT((rho - rho.adjoint()).norm(), 1e-12);
  EXPECT_GE(min_eigenvalue(rho), -1e-9);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-9);
}

void expect_choi(const CMat& chi, int d) {
  EXPECT_LT((chi - chi.adjoint()).norm(), 1e-12);
  EXPECT_GE(min_eigenvalue(chi), -1e-9);
  EXPECT_LT((choi_partial_trace_output(chi) - CMat::Identity(d, d)).norm(), 1e-6);
}

}  // namespace

TEST(Tomo, Designs) {
  EXPECT_EQ(qst_design(1).size(), 3u);
  EXPECT_EQ(qst_design(2).size(), 9u);
  EXPECT_EQ(qpt_design(1).size(), 12u);
  EXPECT_EQ(qpt_design(2).size(), 144u);
  EXPECT_EQ(prep_labels(1), (std::vector<std::string>{"0", "1", "+", "i"}));

  // Preparations span the operator space.
  Eigen::MatrixXcd gram(4, 4);
  const auto labels = prep_labels(1);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) gram(a, b) = (prep_state(labels[a]).adjoint() * prep_state(labels[b])).trace();
  EXPECT_EQ(Eigen::FullPivLU<Eigen::MatrixXcd>(gram).rank(), 4);
}

TEST(Tomo, SettingRotationsMapEigenbasisToZ) {
  for (const std::string s : {"X", "Y", "Z"}) {
    const CMat r = circuit_unitary(setting_rotation(s));
    EXPECT_LT((r.adjoint() * r - CMat::Identity(2, 2)).norm(), 1e-12);
    // R P R^dag = Z.
    EXPECT_LT((r * oracle::pauli(s[0]) * r.adjoint() - oracle::pauli('Z')).norm(), 1e-12) << s;
  }
  // Effects of each setting form a projective resolution of identity.
  for (const auto& s : qst_design(2)) {
    CMat sum = CMat::Zero(4, 4);
    for (const std::string b : {"00", "01", "10", "11"}) sum += setting_effect(s, b);
    EXPECT_LT((sum - CMat::Identity(4, 4)).norm(), 1e-12);
  }
  // "XZ": qubit 1 in X, qubit 0 in Z; outcome "00" is |+> (x) |0> on (q1, q0).
  const CVec plus = (CVec(2) << 1, 1).finished() / std::sqrt(2.0);
  const CVec zero = (CVec(2) << 1, 0).finished();
  EXPECT_LT((setting_effect("XZ", "00") - oracle::kron(pure(plus), pure(zero))).norm(), 1e-12);
}

TEST(Tomo, PrepCircuitsMatchVectors) {
  for (const auto& l : prep_labels(2)) {
    const CVec v = circuit_unitary(prep_circuit(l)).col(0);
    EXPECT_NEAR(std::abs(v.dot(prep_vector(l))), 1.0, 1e-12) << l;
  }
}

TEST(Tomo, QstOfZeroFromExactCounts) {
  TomoDataset data;
  data.records = {{"", "Z", {{"0", 1000}, {"1", 0}}}, {"", "X", {{"0", 500}, {"1", 500}}}, {"", "Y", {{"0", 500}, {"1", 500}}}};
  MleConfig cfg;
  cfg.rank = 1;
  const MleResult r = reconstruct_mle(data, TomoKind::State, cfg);
  EXPECT_GT(r.matrix(0, 0).real(), 0.999);
  expect_density(r.matrix);
}

TEST(Tomo, LinearInversionIsExactForInteriorStates) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const CVec a = haar_state(2, rng), b = haar_state(2, rng);
    const CMat rho = 0.6 * pure(a) + 0.4 * pure(b);
    const MleResult r = linear_inversion(expected_qst(rho, 1000), TomoKind::State);
    EXPECT_LT((r.matrix - rho).norm(), 1e-10);
  }
  // Two-qubit mixed state.
  const CMat u = haar_unitary(4, rng);
  CMat rho = u * Eigen::Vector4d(0.4, 0.3, 0.2, 0.1).cast<cplx>().asDiagonal() * u.adjoint();
  EXPECT_LT((linear_inversion(expected_qst(rho, 1), TomoKind::State).matrix - rho).norm(), 1e-10);
}

TEST(Tomo, NonInformationallyCompleteDataIsRejected) {
  TomoDataset data;
  data.records = {{"", "Z", {{"0", 700}, {"1", 300}}}};
  EXPECT_THROW(linear_inversion(data, TomoKind::State), ValidationError);
  EXPECT_THROW(reconstruct_mle(data, TomoKind::State), ValidationError);
}

TEST(Tomo, QstHaarStateFromSampledCounts) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 5; ++t) {
    const CVec psi = haar_state(2, rng);
    const TomoDataset data = simulate_qst(state_prep(psi), 10000, nullptr, 100 + t);
    MleConfig cfg;
    cfg.rank = 1;
    const MleResult r = reconstruct_mle(data, TomoKind::State, cfg);
    expect_density(r.matrix);
    EXPECT_GT(fidelity_to_target(r.matrix, psi), 0.99);
    // Accepted iterates never lower the likelihood.
    for (std::size_t i = 1; i < r.loglik_trace.size(); ++i) EXPECT_GE(r.loglik_trace[i], r.loglik_trace[i - 1] - 1e-9);
    EXPECT_NEAR(r.loglik(), log_likelihood(data, TomoKind::State, r.matrix), 1e-6 * std::abs(r.loglik()));
  }
}

TEST(Tomo, FullRankMleOnTwoQubits) {
  std::mt19937_64 rng(9);
  const CMat u = haar_unitary(4, rng);
  const CMat rho = u * Eigen::Vector4d(0.7, 0.2, 0.1, 0.0).cast<cplx>().asDiagonal() * u.adjoint();
  const MleResult r = reconstruct_mle(expected_qst(rho, 5000), TomoKind::State);
  expect_density(r.matrix);
  EXPECT_LT((r.matrix - rho).norm(), 1e-3);
}

TEST(Tomo, ConsistencyImprovesWithShots) {
  std::mt19937_64 rng(10);
  std::vector<CVec> targets;
  for (int i = 0; i < 20; ++i) targets.push_back(haar_state(2, rng));
  double prev = 1.0;
  for (std::int64_t shots : {1000, 10000, 100000}) {
    std::vector<double> err;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      MleConfig cfg;
      cfg.rank = 1;
      const auto data = simulate_qst(state_prep(targets[i]), shots, nullptr, 7 * i + static_cast<std::uint64_t>(shots));
      err.push_back(1 - fidelity_to_target(reconstruct_mle(data, TomoKind::State, cfg).matrix, targets[i]));
    }
    std::nth_element(err.begin(), err.begin() + 10, err.end());
    EXPECT_LT(err[10], prev);
    prev = err[10];
  }
}

TEST(Tomo, QptIdentityFromExactData) {
  const CMat choi = choi_of_unitary(CMat::Identity(2, 2));
  const MleResult r = reconstruct_mle(expected_qpt(choi, 1000), TomoKind::Process);
  expect_choi(r.matrix, 2);
  CVec v(4);
  v << 1, 0, 0, 1;
  EXPECT_LT((r.matrix - v * v.adjoint()).norm(), 1e-4);
  EXPECT_GT(entanglement_fidelity(r.matrix, CMat::Identity(2, 2)), 0.9999);
}

TEST(Tomo, ChoiConventions) {
  std::mt19937_64 rng(4);
  const CMat u = haar_unitary(2, rng);
  const CMat choi = choi_of_unitary(u);
  const CVec psi = haar_state(2, rng);
  EXPECT_LT((apply_choi(choi, pure(psi)) - pure(u * psi)).norm(), 1e-12);
  expect_choi(choi, 2);
  EXPECT_NEAR(entanglement_fidelity(choi, u), 1.0, 1e-12);
  EXPECT_NEAR(entanglement_fidelity(choi_of_unitary(CMat::Identity(2, 2)), CMat::Identity(2, 2)), 1.0, 1e-12);
}

TEST(Tomo, QptSampledRx) {
  Circuit c(1, 0);
  c.rx(0, kPi / 3);
  const MleResult r = reconstruct_mle(simulate_qpt(c, 10000, nullptr, 3), TomoKind::Process);
  expect_choi(r.matrix, 2);
  EXPECT_GT(entanglement_fidelity(r.matrix, circuit_unitary(c)), 0.99);
}

TEST(Tomo, QdtOfIdealZMeasurement) {
  const MleResult r = reconstruct_mle(simulate_qdt(Circuit(1, 0), 10000, nullptr, 1), TomoKind::Detector);
  ASSERT_EQ(r.povm.size(), 2u);
  CMat sum = CMat::Zero(2, 2);
  for (const auto& e : r.povm) {
    EXPECT_GE(min_eigenvalue(e), -1e-9);
    sum += e;
  }
  EXPECT_LT((sum - CMat::Identity(2, 2)).norm(), 1e-6);
  CMat p0 = CMat::Zero(2, 2), p1 = CMat::Zero(2, 2);
  p0(0, 0) = 1;
  p1(1, 1) = 1;
  EXPECT_LT((r.povm[0] - p0).norm(), 0.02);
  EXPECT_LT((r.povm[1] - p1).norm(), 0.02);
}

TEST(Tomo, HamiltonianExtraction) {
  const QhtResult id = qht_extract(choi_of_unitary(CMat::Identity(2, 2)), 1.0);
  EXPECT_LT(id.hamiltonian.norm(), 1e-8);
  EXPECT_FALSE(id.noisy);

  const QhtResult z = qht_extract(choi_of_unitary(oracle::pauli('Z')), 1.0);
  CMat hz = CMat::Zero(2, 2);
  hz(0, 0) = kPi / 2;
  hz(1, 1) = -kPi / 2;
  EXPECT_LT((z.hamiltonian - hz).norm(), 1e-8);
  EXPECT_FALSE(z.branch_ambiguous);

  for (double theta : {0.01, 0.1, 0.5}) {
    const double tau = 2.0;
    const QhtResult r = qht_extract(choi_of_unitary(oracle::gate(GateKind::RX, {theta})), tau);
    EXPECT_LT((r.hamiltonian - theta / (2 * tau) * oracle::pauli('X')).norm(), 1e-6 * std::max(1.0, theta));
    EXPECT_LT((r.hamiltonian - r.hamiltonian.adjoint()).norm(), 1e-8);
  }
  // A half-depolarized channel is flagged.
  const CMat mixed = 0.5 * choi_of_unitary(CMat::Identity(2, 2)) + 0.5 * CMat::Identity(4, 4) / 2.0;
  EXPECT_TRUE(qht_extract(mixed, 1.0).noisy);
}

TEST(Tomo, FidelityExamples) {
  std::mt19937_64 rng(2);
  const CVec psi = haar_state(2, rng);
  EXPECT_NEAR(fidelity_to_target(pure(psi), psi), 1.0, 1e-12);
  EXPECT_NEAR(fidelity_to_target(CMat::Identity(2, 2) / 2.0, psi), 0.5, 1e-12);
  EXPECT_THROW(fidelity_to_target(CMat::Identity(4, 4) / 4.0, psi), ValidationError);
}

TEST(Tomo, DatasetJsonRoundTrip) {
  const TomoDataset d = simulate_qst(Circuit(2, 0), 100, nullptr, 1);
  const TomoDataset e = TomoDataset::from_json(d.to_json());
  ASSERT_EQ(e.records.size(), d.records.size());
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    EXPECT_EQ(e.records[i].setting, d.records[i].setting);
    EXPECT_EQ(e.records[i].counts, d.records[i].counts);
  }
  EXPECT_EQ(e.n_qubits(), 2);
  std::mt19937_64 rng(1);
  const CMat m = haar_unitary(3, rng);
  EXPECT_EQ(matrix_from_json(matrix_to_json(m)), m);
}
