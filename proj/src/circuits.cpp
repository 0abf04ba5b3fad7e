#include "qemul/circuits.hpp"

#include <algorithm>
#include <cmath>

#include "qemul/parallel.hpp"
#include "qemul/simulator.hpp"

namespace qemul {

Circuit bernstein_vazirani(const std::string& secret) {
  const int n = static_cast<int>(secret.size());
  if (n < 1) throw ValidationError("secret must be non-empty");
  if (secret.find_first_not_of("01") != std::string::npos) throw ValidationError("secret must be a bitstring");
  Circuit c(n + 1, n);
  for (int q = 0; q < n; ++q) c.h(q);
  c.x(n).h(n);
  for (int q = 0; q < n; ++q) {
    if (secret[static_cast<std::size_t>(n - 1 - q)] == '1') c.cx(q, n);
  }
  for (int q = 0; q < n; ++q) c.h(q);
  for (int q = 0; q < n; ++q) c.measure(q, q);
  return c;
}

namespace {

void append_single(Circuit& c, const Eigen::Matrix2cd& u, int target) {
  const ZyzAngles a = zyz_decompose(u);
  c.u(target, a.theta, a.phi, a.lambda);
}

// Controlled-V via V = e^{ia} Rz(phi) Ry(theta) Rz(lambda) = e^{ia} A X B X C.
void append_controlled(Circuit& c, int control, int target, const Eigen::Matrix2cd& v) {
  const ZyzAngles z = zyz_decompose(v);
  const double alpha = z.alpha + (z.phi + z.lambda) / 2;
  c.rz(target, (z.lambda - z.phi) / 2);
  c.cx(control, target);
  c.rz(target, -(z.phi + z.lambda) / 2).ry(target, -z.theta / 2);
  c.cx(control, target);
  c.ry(target, z.theta / 2).rz(target, z.phi);
  if (alpha != 0.0) c.phase(control, alpha);
}

}  // namespace

void append_multi_controlled(Circuit& c, const std::vector<int>& controls, int target, const Eigen::Matrix2cd& u) {
  if (controls.empty()) {
    append_single(c, u, target);
    return;
  }
  if (controls.size() == 1) {
    append_controlled(c, controls[0], target, u);
    return;
  }
  Eigen::Matrix2cd x;
  x << 0, 1, 1, 0;
  const Eigen::Matrix2cd v = sqrt_unitary(u);
  const std::vector<int> rest(controls.begin(), controls.end() - 1);
  const int last = controls.back();
  append_controlled(c, last, target, v);
  append_multi_controlled(c, rest, last, x);
  append_controlled(c, last, target, v.adjoint());
  append_multi_controlled(c, rest, last, x);
  append_multi_controlled(c, rest, target, v);
}

namespace {

void append_mcz(Circuit& c, int n) {
  Eigen::Matrix2cd z;
  z << 1, 0, 0, -1;
  std::vector<int> controls;
  for (int q = 0; q + 1 < n; ++q) controls.push_back(q);
  append_multi_controlled(c, controls, n - 1, z);
}

}  // namespace

Circuit grover(int n, std::uint64_t marked, int iterations) {
  if (n < 1 || n > 30) throw ValidationError("Grover register must have 1..30 qubits");
  if (marked >= (std::uint64_t{1} << n)) throw ValidationError("marked item out of range");
  if (iterations < 0) throw ValidationError("negative iteration count");
  Circuit c(n, n);
  for (int q = 0; q < n; ++q) c.h(q);
  for (int it = 0; it < iterations; ++it) {
    for (int q = 0; q < n; ++q) {
      if (!((marked >> q) & 1)) c.x(q);
    }
    append_mcz(c, n);
    for (int q = 0; q < n; ++q) {
      if (!((marked >> q) & 1)) c.x(q);
    }
    for (int q = 0; q < n; ++q) c.h(q).x(q);
    append_mcz(c, n);
    for (int q = 0; q < n; ++q) c.x(q).h(q);
  }
  c.measure_all();
  return c;
}

double grover_success_probability(int n, int iterations) {
  const double theta = std::asin(std::pow(2.0, -n / 2.0));
  const double s = std::sin((2 * iterations + 1) * theta);
  return s * s;
}

Circuit ghz(int n) {
  if (n < 2) throw ValidationError("GHZ state needs at least two qubits");
  Circuit c(n, n);
  c.h(0);
  for (int q = 0; q + 1 < n; ++q) c.cx(q, q + 1);
  c.measure_all();
  return c;
}

Circuit swap_test(int m, const std::vector<double>& prep_a, const std::vector<double>& prep_b) {
  if (m < 1) throw ValidationError("swap test needs at least one qubit per register");
  const auto sm = static_cast<std::size_t>(m);
  if ((!prep_a.empty() && prep_a.size() != sm) || (!prep_b.empty() && prep_b.size() != sm)) {
    throw ValidationError("preparation angles must list one value per register qubit");
  }
  Circuit c(2 * m + 1, 1);
  for (int i = 0; i < m; ++i) {
    if (!prep_a.empty()) c.ry(1 + i, prep_a[static_cast<std::size_t>(i)]);
    if (!prep_b.empty()) c.ry(1 + m + i, prep_b[static_cast<std::size_t>(i)]);
  }
  Eigen::Matrix2cd x;
  x << 0, 1, 1, 0;
  c.h(0);
  for (int i = 0; i < m; ++i) {
    const int a = 1 + i;
    const int b = 1 + m + i;
    c.cx(b, a);
    append_multi_controlled(c, {0, a}, b, x);
    c.cx(b, a);
  }
  c.h(0);
  c.measure(0, 0);
  return c;
}

Circuit qaoa_circuit(const QuboProblem& q, const FixedAngles& angles) {
  if (angles.p() < 1) throw ValidationError("QAOA needs at least one layer");
  if (angles.gammas.size() != angles.betas.size()) throw ValidationError("beta and gamma lists differ in length");
  Circuit c(q.n, q.n);
  for (int i = 0; i < q.n; ++i) c.h(i);
  for (int layer = 0; layer < angles.p(); ++layer) {
    const double gamma = angles.gammas[static_cast<std::size_t>(layer)];
    const double beta = angles.betas[static_cast<std::size_t>(layer)];
    for (const auto& [ij, s] : q.s) {
      if (ij.first != ij.second) c.rzz(ij.first, ij.second, gamma * s);
    }
    for (const auto& [ij, s] : q.s) {
      if (ij.first == ij.second) c.rz(ij.first, 2 * gamma * s);
    }
    for (int i = 0; i < q.n; ++i) c.rx(i, 2 * beta);
  }
  c.measure_all();
  return c;
}

double qaoa_energy(const QuboProblem& q, const FixedAngles& angles) {
  const Distribution d = probabilities(qaoa_circuit(q, angles));
  double e = 0.0;
  for (std::size_t x = 0; x < d.size(); ++x) {
    if (d[x] != 0.0) e += d[x] * (q.energy_bits(x) - q.offset);
  }
  return e;
}

double qaoa_success_probability(const QuboProblem& q, const FixedAngles& angles) {
  const Distribution d = probabilities(qaoa_circuit(q, angles));
  double p = 0.0;
  for (auto x : brute_force_optima(q, 1e-9)) p += d[static_cast<std::size_t>(x)];
  return p;
}

namespace {

struct Objective {
  const std::vector<QuboProblem>& instances;
  std::vector<std::vector<std::uint64_t>> optima;
  int p;

  FixedAngles unpack(const std::vector<double>& v) const {
    FixedAngles a;
    for (int l = 0; l < p; ++l) {
      a.betas.push_back(v[static_cast<std::size_t>(2 * l)]);
      a.gammas.push_back(v[static_cast<std::size_t>(2 * l + 1)]);
    }
    return a;
  }

  std::vector<double> per_instance(const std::vector<double>& v) const {
    const FixedAngles a = unpack(v);
    std::vector<double> out(instances.size(), 0.0);
    parallel_for(instances.size(), [&](std::size_t i) {
      const Distribution d = probabilities(qaoa_circuit(instances[i], a));
      double s = 0.0;
      for (auto x : optima[i]) s += d[static_cast<std::size_t>(x)];
      out[i] = s;
    });
    return out;
  }

  double operator()(const std::vector<double>& v) const {
    const auto s = per_instance(v);
    return *std::min_element(s.begin(), s.end());
  }
};

double wrap(double x, double period) {
  x = std::fmod(x, period);
  return x < 0 ? x + period : x;
}

}  // namespace

TrainResult train_fixed_angles(const std::vector<QuboProblem>& instances, int p, const TrainConfig& cfg,
                               std::uint64_t seed) {
  if (instances.empty()) throw ValidationError("no training instances");
  if (p < 1) throw ValidationError("QAOA needs at least one layer");
  for (const auto& q : instances) {
    if (q.n > 12) throw ValidationError("training instances are limited to 12 variables");
  }
  Objective obj{instances, {}, p};
  for (const auto& q : instances) obj.optima.push_back(brute_force_optima(q, 1e-9));

  const std::size_t dims = static_cast<std::size_t>(2 * p);
  auto period = [](std::size_t k) { return k % 2 == 0 ? kPi : 2 * kPi; };
  Rng rng(splitmix64(seed));

  std::vector<double> best(dims, 0.0);
  double best_val = obj(best);
  for (int restart = 0; restart < std::max(1, cfg.restarts); ++restart) {
    std::vector<double> x(dims, 0.0);
    if (restart > 0) {
      for (std::size_t k = 0; k < dims; ++k) x[k] = uniform01(rng) * period(k);
    }
    double fx = obj(x);
    double step = cfg.initial_step;
    for (int it = 0; it < cfg.max_iterations && step >= cfg.min_step; ++it) {
      bool improved = false;
      for (std::size_t k = 0; k < dims && !improved; ++k) {
        for (double dir : {1.0, -1.0}) {
          std::vector<double> y = x;
          y[k] = wrap(y[k] + dir * step, period(k));
          const double fy = obj(y);
          if (fy > fx) {
            x = std::move(y);
            fx = fy;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step /= 2;
    }
    if (fx > best_val) {
      best_val = fx;
      best = x;
    }
  }
  TrainResult r;
  r.angles = obj.unpack(best);
  r.per_instance = obj.per_instance(best);
  r.min_success = best_val;
  return r;
}

QuboProblem maxcut_qubo(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n < 1) throw ValidationError("graph needs at least one vertex");
  QuboProblem q;
  q.n = n;
  for (const auto& [a, b] : edges) {
    if (a == b) throw ValidationError("self-loop in Max-Cut graph");
    q.add(a, b, 1.0);
  }
  return q;
}

QuboProblem random_maxcut(int n, Rng& rng) {
  if (n < 2) throw ValidationError("random graph needs at least two vertices");
  for (;;) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (uniform01(rng) < 0.5) edges.emplace_back(i, j);
      }
    }
    if (!edges.empty()) return maxcut_qubo(n, edges);
  }
}

}  // namespace qemul
