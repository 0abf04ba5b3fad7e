#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "qemul/noise.hpp"
#include "qemul/simulator.hpp"

using namespace qemul;
using oracle::M;

namespace {

M mat(std::initializer_list<oracle::cd> v) {
  M m(2, 2);
  auto it = v.begin();
  m << it[0], it[1], it[2], it[3];
  return m;
}

std::vector<M> amplitude_kraus(double a) {
  return {mat({1, 0, 0, std::sqrt(1 - a)}), mat({0, std::sqrt(a), 0, 0})};
}

std::vector<M> phase_kraus(double b) {
  return {mat({1, 0, 0, std::sqrt(1 - b)}), mat({0, 0, 0, std::sqrt(b)})};
}

std::vector<M> depol1_kraus(double p) {
  return {std::sqrt(1 - p) * oracle::pauli('I'), std::sqrt(p / 3) * oracle::pauli('X'),
          std::sqrt(p / 3) * oracle::pauli('Y'), std::sqrt(p / 3) * oracle::pauli('Z')};
}

std::vector<M> depol2_kraus(double p) {
  std::vector<M> out;
  const std::string l = "IXYZ";
  for (char a : l)
    for (char b : l) {
      const double w = (a == 'I' && b == 'I') ? 1 - p : p / 15;
      out.push_back(std::sqrt(w) * oracle::kron(oracle::pauli(a), oracle::pauli(b)));
    }
  return out;
}

// Exact density-matrix evolution with channels after every listed gate kind.
struct DensityOracle {
  int n;
  std::map<GateKind, std::vector<std::vector<M>>> channels;

  std::vector<double> run(const Circuit& c) const {
    const Eigen::Index d = Eigen::Index{1} << n;
    M rho = M::Zero(d, d);
    rho(0, 0) = 1;
    M v = oracle::vec(rho);
    for (const auto& ins : c.instructions) {
      if (!is_unitary(ins.kind) || ins.kind == GateKind::Barrier) continue;
      v = oracle::unitary_superop(oracle::embed(oracle::gate(ins.kind, ins.params), ins.qubits, n)) * v;
      const auto it = channels.find(ins.kind);
      if (it == channels.end()) continue;
      for (const auto& ks : it->second) {
        if (ks.front().rows() == 4 && ins.qubits.size() == 2) {
          v = oracle::superop(ks, ins.qubits, n) * v;
        } else {
          for (int q : ins.qubits) v = oracle::superop(ks, {q}, n) * v;
        }
      }
    }
    return oracle::diag_probs(oracle::unvec(v, d));
  }
};

std::vector<double> empirical(const CountsHistogram& h, int n) {
  std::vector<double> p(std::size_t{1} << n, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = h.frequency(to_bitstring(i, n));
  return p;
}

}  // namespace

TEST(Noise, EveryChannelIsComplete) {
  const std::vector<ChannelSpec> specs = {
      ChannelSpec::amplitude(0.0),      ChannelSpec::amplitude(0.37),     ChannelSpec::amplitude(1.0),
      ChannelSpec::phase(0.2),          ChannelSpec::phase(1.0),          ChannelSpec::t1t2(50, 70, 13),
      ChannelSpec::t1t2(100, 200, 40),  ChannelSpec::depolarizing1(0.1),  ChannelSpec::depolarizing1(0.75),
      ChannelSpec::depolarizing2(0.2),  ChannelSpec::depolarizing2(15.0 / 16), ChannelSpec::pauli(0.1, 0.2, 0.3),
      ChannelSpec::readout_flip(0.05)};
  for (const auto& s : specs) EXPECT_LT(build_channel(s).completeness_error(), 1e-12);
}

TEST(Noise, ChannelMatricesMatchTextbookForms) {
  auto same = [](const KrausSet& k, const std::vector<M>& ref) {
    // Compare channels through their superoperators (Kraus sets are not unique).
    std::vector<M> ours;
    for (const auto& op : k.operators) {
      M m(k.dim, k.dim);
      for (int r = 0; r < k.dim; ++r)
        for (int c = 0; c < k.dim; ++c) m(r, c) = op[static_cast<std::size_t>(r * k.dim + c)];
      ours.push_back(m);
    }
    const int n = k.dim == 2 ? 1 : 2;
    const std::vector<int> qs = n == 1 ? std::vector<int>{0} : std::vector<int>{1, 0};
    return (oracle::superop(ours, qs, n) - oracle::superop(ref, qs, n)).norm();
  };
  EXPECT_LT(same(build_channel(ChannelSpec::amplitude(0.3)), amplitude_kraus(0.3)), 1e-14);
  EXPECT_LT(same(build_channel(ChannelSpec::phase(0.4)), phase_kraus(0.4)), 1e-14);
  EXPECT_LT(same(build_channel(ChannelSpec::depolarizing1(0.1)), depol1_kraus(0.1)), 1e-14);
  EXPECT_LT(same(build_channel(ChannelSpec::depolarizing2(0.3)), depol2_kraus(0.3)), 1e-14);

  // t1t2 = amplitude(1 - e^{-t/T1}) followed by phase(1 - e^{-t/Tphi}).
  const double t1 = 50, t2 = 70, t = 20;
  const double tphi = t1 * t2 / (2 * t1 - t2);
  std::vector<M> composed;
  for (const auto& a : amplitude_kraus(1 - std::exp(-t / t1)))
    for (const auto& b : phase_kraus(1 - std::exp(-t / tphi))) composed.push_back(b * a);
  EXPECT_LT(same(build_channel(ChannelSpec::t1t2(t1, t2, t)), composed), 1e-14);
}

TEST(Noise, ParameterChecks) {
  EXPECT_THROW(build_channel(ChannelSpec::amplitude(1.5)), NoiseConfigError);
  EXPECT_THROW(build_channel(ChannelSpec::depolarizing1(-0.1)), NoiseConfigError);
  EXPECT_THROW(build_channel(ChannelSpec::t1t2(50, 120, 1)), NoiseConfigError);
  EXPECT_THROW(build_channel(ChannelSpec::pauli(0.5, 0.4, 0.3)), NoiseConfigError);
}

TEST(Noise, DephasingTime) {
  EXPECT_DOUBLE_EQ(dephasing_time(100, 100), 100.0);
  EXPECT_NEAR(dephasing_time(50, 70), 3500.0 / 30.0, 1e-12);
  EXPECT_TRUE(std::isinf(dephasing_time(100, 200)));
}

TEST(Noise, FullAmplitudeDampingResetsToGround) {
  const KrausSet k = build_channel(ChannelSpec::amplitude(1.0));
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    StateVector s = init_state(1);
    apply_instruction(s, {GateKind::U, {0}, {}, {1.1, 0.4, -0.7}});
    const int q = 0;
    apply_channel_stochastic(s, k, std::span<const int>(&q, 1), rng);
    EXPECT_NEAR(std::norm(s[0]), 1.0, 1e-12);
  }
}

TEST(Noise, StochasticBranchExamples) {
  Rng rng(2);
  const int q = 0;
  // A single unitary Kraus operator acts deterministically.
  KrausSet unitary;
  unitary.label = "rx";
  const Mat2 rx = rx_matrix(0.7);
  unitary.operators.push_back({rx.begin(), rx.end()});
  StateVector a = init_state(1), b = init_state(1);
  EXPECT_EQ(apply_channel_stochastic(a, unitary, std::span<const int>(&q, 1), rng), 0);
  apply_instruction(b, {GateKind::RX, {0}, {}, {0.7}});
  EXPECT_LT(std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]), 1e-15);

  // Projective measurement channel on |+>.
  KrausSet meas;
  meas.operators = {{1, 0, 0, 0}, {0, 0, 0, 1}};
  int zeros = 0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    StateVector s = init_state(1);
    apply_instruction(s, {GateKind::U, {0}, {}, {kPi / 2, 0, kPi}});
    zeros += apply_channel_stochastic(s, meas, std::span<const int>(&q, 1), rng) == 0;
  }
  EXPECT_NEAR(zeros / double(trials), 0.5, 3 * std::sqrt(0.25 / trials));

  // amplitude(0.3) on |1>.
  const KrausSet amp = build_channel(ChannelSpec::amplitude(0.3));
  double pop = 0;
  for (int i = 0; i < trials; ++i) {
    StateVector s = init_state(1);
    s.apply_x(0);
    apply_channel_stochastic(s, amp, std::span<const int>(&q, 1), rng);
    pop += std::norm(s[1]);
  }
  EXPECT_NEAR(pop / trials, 0.7, 3 * std::sqrt(0.21 / trials));

  // Incomplete sets are caught at runtime.
  KrausSet broken;
  broken.operators = {{0.5, 0, 0, 0.5}};
  StateVector s = init_state(1);
  EXPECT_THROW(apply_channel_stochastic(s, broken, std::span<const int>(&q, 1), rng), ConsistencyError);
}

TEST(Noise, TrajectoryAverageMatchesSuperoperator) {
  struct Case {
    Circuit circuit;
    NoiseModel model;
    DensityOracle exact;
  };
  std::vector<Case> cases;
  {
    Circuit c(1, 1);
    c.u(0, 1.2, 0.3, -0.4).rx(0, 0.9).u(0, 2.0, 0.1, 0.5);
    NoiseModel m;
    m.gates[GateKind::U].channels = {ChannelSpec::amplitude(0.3)};
    m.gates[GateKind::RX].channels = {ChannelSpec::depolarizing1(0.1)};
    cases.push_back({c, m, {1, {{GateKind::U, {amplitude_kraus(0.3)}}, {GateKind::RX, {depol1_kraus(0.1)}}}}});
  }
  {
    Circuit c(2, 2);
    c.h(0).cx(0, 1).ry(1, 0.8).rzz(0, 1, 0.6).rx(0, 1.3);
    NoiseModel m;
    m.gates[GateKind::CX].channels = {ChannelSpec::depolarizing1(0.1), ChannelSpec::amplitude(0.3)};
    m.gates[GateKind::RZZ].channels = {ChannelSpec::depolarizing2(0.1)};
    m.gates[GateKind::RY].channels = {ChannelSpec::amplitude(0.3)};
    cases.push_back({c, m,
                     {2,
                      {{GateKind::CX, {depol1_kraus(0.1), amplitude_kraus(0.3)}},
                       {GateKind::RZZ, {depol2_kraus(0.1)}},
                       {GateKind::RY, {amplitude_kraus(0.3)}}}}});
  }
  std::uint64_t seed = 40;
  for (auto& cs : cases) {
    const std::vector<double> exact = cs.exact.run(cs.circuit);
    Circuit measured = cs.circuit;
    measured.measure_all();
    const CountsHistogram h = sample(measured, 100000, &cs.model, seed++);
    EXPECT_LT(oracle::total_variation(empirical(h, cs.circuit.n_qubits), exact), 0.01);
  }
}

TEST(Noise, PerturbAnglesContract) {
  NoiseModel zero;
  zero.gates[GateKind::RX].theta = AngleError{};
  ShotContext ctx;
  Rng rng(3);
  const Instruction rx{GateKind::RX, {0}, {}, {1.0}};
  EXPECT_EQ(perturb_angles(rx, zero, ctx, rng), rx);

  NoiseModel constant;
  constant.gates[GateKind::RX].theta.theta_c = 0.05;
  EXPECT_DOUBLE_EQ(perturb_angles(rx, constant, ctx, rng).params[0], 1.05);

  NoiseModel nm;
  nm.gates[GateKind::RXX].theta.sigma_nm = 0.2;
  const Instruction rxx{GateKind::RXX, {0, 1}, {}, {0.5}};
  const Instruction rxx_other{GateKind::RXX, {1, 2}, {}, {0.9}};
  std::vector<double> first, second;
  for (int shot = 0; shot < 4000; ++shot) {
    ctx.clear();
    const double a = perturb_angles(rxx, nm, ctx, rng).params[0] - 0.5;
    const double b = perturb_angles(rxx, nm, ctx, rng).params[0] - 0.5;
    EXPECT_DOUBLE_EQ(a, b);
    first.push_back(a);
    second.push_back(perturb_angles(rxx_other, nm, ctx, rng).params[0] - 0.9);
  }
  // Shot-to-shot lag-1 autocorrelation and cross-tuple correlation near zero.
  auto corr = [](const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; syy += y[i] * y[i]; sxy += x[i] * y[i];
    }
    return (sxy / n - sx * sy / n / n) / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  };
  const std::vector<double> lag0(first.begin(), first.end() - 1), lag1(first.begin() + 1, first.end());
  EXPECT_LT(std::abs(corr(lag0, lag1)), 4 / std::sqrt(4000.0));
  EXPECT_LT(std::abs(corr(first, second)), 4 / std::sqrt(4000.0));

  double var = 0;
  for (double v : first) var += v * v;
  EXPECT_NEAR(var / first.size(), 0.04, 0.04 * 4 * std::sqrt(2.0 / 4000));
}

TEST(Noise, MarkovAngleErrorMatchesAnalyticFidelity) {
  const double sigma = 0.5;
  NoiseModel m;
  m.gates[GateKind::RX].theta.sigma_m = sigma;
  Circuit c(1, 1);
  c.rx(0, kPi).measure(0, 0);
  const int shots = 100000;
  const CountsHistogram h = sample(c, shots, &m, 12);
  // E[cos^2(d/2)] for d ~ N(0, sigma^2).
  const double expect = (1 + std::exp(-sigma * sigma / 2)) / 2;
  EXPECT_NEAR(h.frequency("1"), expect, 3 * std::sqrt(expect * (1 - expect) / shots));

  // The variance of the perturbed angle is sigma^2 per application.
  ShotContext ctx;
  Rng rng(5);
  double s2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double d = perturb_angles({GateKind::RX, {0}, {}, {kPi}}, m, ctx, rng).params[0] - kPi;
    s2 += d * d;
  }
  EXPECT_NEAR(s2 / n, sigma * sigma, sigma * sigma * 4 * std::sqrt(2.0 / n));
}

TEST(Noise, CoherentErrorIsAFixedRotation) {
  NoiseModel m;
  m.gates[GateKind::U].coherent_rx = 0.3;
  Circuit c(1, 1);
  c.u(0, 0, 0, 0);
  EXPECT_FALSE(m.is_stochastic());
  Circuit ref(1, 1);
  ref.rx(0, 0.3);
  const Distribution d = probabilities(ref);
  c.measure(0, 0);
  const CountsHistogram h = sample(c, 100000, &m, 1);
  EXPECT_NEAR(h.frequency("1"), d[1], 3 * std::sqrt(d[1] * d[0] / 100000));
}

TEST(Noise, SpamFlips) {
  NoiseModel m;
  m.readout_flip = 0.1;
  Circuit c(1, 1);
  c.measure(0, 0);
  EXPECT_NEAR(sample(c, 100000, &m, 3).frequency("1"), 0.1, 3 * std::sqrt(0.09 / 100000));
  NoiseModel p;
  p.prep_flip = 0.2;
  EXPECT_NEAR(sample(c, 100000, &p, 4).frequency("1"), 0.2, 3 * std::sqrt(0.16 / 100000));
  NoiseModel both;
  both.qubits[0].readout = 1.0;
  EXPECT_EQ(sample(c, 100, &both, 4).frequency("1"), 1.0);
}

TEST(Noise, JsonSchema) {
  const auto j = nlohmann::json::parse(R"({
    "gates": {
      "cx": {"channel": {"type": "depolarizing2", "p": 0.01}},
      "rx": {"channel": [{"type": "amplitude", "a": 0.1}, {"type": "phase", "b": 0.2}],
             "angle_errors": {"theta_c": 0.01, "sigma_m": 0.02, "sigma_nm": 0.03}},
      "r": {"angle_errors": {"sigma_m": 0.01, "phi": {"theta_c": 0.02}}},
      "u": {"coherent": {"rz": 0.05}}
    },
    "qubits": {"0": {"T1": 100, "T2": 80}, "1": {"readout": 0.02}},
    "durations": {"rx": 1.5},
    "spam": {"prep": 0.001, "readout": 0.01}
  })");
  const NoiseModel m = NoiseModel::from_json(j);
  EXPECT_EQ(m.gates.at(GateKind::RX).channels.size(), 2u);
  EXPECT_DOUBLE_EQ(m.gates.at(GateKind::R).phi.theta_c, 0.02);
  EXPECT_DOUBLE_EQ(m.readout_flip_for(1), 0.02);
  EXPECT_DOUBLE_EQ(m.readout_flip_for(0), 0.01);
  EXPECT_TRUE(m.is_stochastic());
  const NoiseModel again = NoiseModel::from_json(m.to_json());
  EXPECT_EQ(again.to_json(), m.to_json());

  auto bad = [](const char* text) { return NoiseModel::from_json(nlohmann::json::parse(text)); };
  EXPECT_THROW(bad(R"({"gatez": {}})"), NoiseConfigError);
  EXPECT_THROW(bad(R"({"gates": {"rx": {"chanel": {}}}})"), NoiseConfigError);
  EXPECT_THROW(bad(R"({"gates": {"rx": {"channel": {"type": "amplitude", "a": 0.1, "b": 1}}}})"), NoiseConfigError);
  EXPECT_THROW(bad(R"({"gates": {"foo": {}}})"), NoiseConfigError);
  EXPECT_THROW(bad(R"({"gates": {"u": {"angle_errors": {"sigma_m": 0.1}}}})"), NoiseConfigError);
  EXPECT_THROW(bad(R"({"gates": {"rx": {"channel": {"type": "depolarizing2", "p": 0.1}}}})"), NoiseConfigError);
  EXPECT_THROW(bad(R"({"gates": {"measure": {"channel": {"type": "amplitude", "a": 0.1}}}})"), NoiseConfigError);
  EXPECT_THROW(bad(R"({"qubits": {"0": {"T1": 10, "T2": 30}}})"), NoiseConfigError);
  EXPECT_THROW(bad(R"({"qubits": {"0": {"T1": 10}}})"), NoiseConfigError);
  EXPECT_THROW(bad(R"({"spam": {"readout": 2}})"), NoiseConfigError);
  EXPECT_THROW(bad(R"({"gates": {"rx": {"angle_errors": {"sigma_m": -1}}}})"), NoiseConfigError);
}

TEST(Noise, RelaxationDuringIdle) {
  // |1> held for t = T1 through a timed identity: excited population e^{-1}.
  NoiseModel m;
  m.qubits[0].t1 = 100;
  m.qubits[0].t2 = 150;
  m.durations[GateKind::U] = 100;
  Circuit c(1, 1);
  c.rx(0, kPi).u(0, 0, 0, 0).measure(0, 0);
  const int shots = 100000;
  const double p = std::exp(-1.0);
  EXPECT_NEAR(sample(c, shots, &m, 6).frequency("1"), p, 3 * std::sqrt(p * (1 - p) / shots));
}
