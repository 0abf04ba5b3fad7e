#include "qemul/bench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "qemul/linalg.hpp"
#include "qemul/parallel.hpp"
#include "qemul/simulator.hpp"

namespace qemul {

double fidelity(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw ValidationError("distributions differ in length");
  double sp = 0.0;
  double sq = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) throw ValidationError("probabilities must be non-negative");
    sp += p[i];
    sq += q[i];
    acc += std::sqrt(p[i] * q[i]);
  }
  if (std::abs(sp - 1.0) > 1e-6 || std::abs(sq - 1.0) > 1e-6) throw ValidationError("distribution is not normalized");
  return std::min(1.0, acc * acc);
}

double h_est(double n_h, double n_c, double n_s, bool factor2) {
  if (!(n_c > 0) || !(n_s > 0)) throw ValidationError("n_c and n_s must be positive");
  if (n_h < 0 || n_h > n_c * n_s) throw ValidationError("n_h must lie in [0, n_c n_s]");
  const double radicand = n_h * (n_s - n_h / n_c);
  if (radicand < 0.0) throw ValidationError("inconsistent heavy-output counts (negative radicand)");
  return (n_h - (factor2 ? 2.0 : 1.0) * std::sqrt(radicand)) / (n_c * n_s);
}

std::vector<std::size_t> heavy_set(const std::vector<double>& ideal) {
  std::vector<std::size_t> out;
  if (ideal.empty()) return out;
  std::vector<double> sorted(ideal);
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = (n % 2) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  for (std::size_t i = 0; i < n; ++i) {
    if (ideal[i] > median) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------- quantum volume

std::string QvResult::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17) << "n,n_c,n_s,n_h,h_est,heavy_fraction,passed\n";
  for (const auto& r : records) {
    os << r.n << ',' << r.n_c << ',' << r.n_s << ',' << r.n_h << ',' << r.h_est << ',' << r.heavy_fraction << ','
       << (r.passed ? 1 : 0) << '\n';
  }
  return os.str();
}

nlohmann::json QvResult::to_json() const {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records) {
    recs.push_back({{"n", r.n}, {"n_c", r.n_c}, {"n_s", r.n_s}, {"n_h", r.n_h}, {"h_est", r.h_est},
                    {"heavy_fraction", r.heavy_fraction}, {"passed", r.passed}});
  }
  return {{"records", recs}, {"quantum_volume", quantum_volume}};
}

Circuit qv_circuit(int n, Rng& rng) {
  if (n < 2) throw ValidationError("quantum-volume circuits need at least 2 qubits");
  Circuit c(n, n);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int layer = 0; layer < n; ++layer) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int k = 0; k + 1 < n; k += 2) {
      append_two_qubit_unitary(c, haar_su4(rng), perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(k + 1)]);
    }
  }
  return c;
}

QvResult qv_experiment(int n_max, int n_c, int n_s, const NoiseModel* noise, std::uint64_t seed, bool factor2) {
  if (n_max < 2) throw ValidationError("n_max must be >= 2");
  if (n_c < 1 || n_s < 1) throw ValidationError("n_c and n_s must be >= 1");
  QvResult result;
  bool all_passed = true;
  for (int n = 2; n <= n_max; ++n) {
    const std::uint64_t width_seed = splitmix64(seed + static_cast<std::uint64_t>(n));
    std::vector<std::int64_t> heavy(static_cast<std::size_t>(n_c), 0);
    parallel_for(heavy.size(), [&](std::size_t ci) {
      Rng rng = derive_stream(width_seed, ci);
      Circuit c = qv_circuit(n, rng);
      const auto ideal = probabilities(c).probabilities;
      const auto hs = heavy_set(ideal);
      c.measure_all();
      const auto hist = sample(c, n_s, noise, splitmix64(width_seed ^ (ci + 1)));
      std::int64_t nh = 0;
      for (std::size_t idx : hs) {
        auto it = hist.counts.find(to_bitstring(idx, n));
        if (it != hist.counts.end()) nh += it->second;
      }
      heavy[ci] = nh;
    });
    QvRecord rec;
    rec.n = n;
    rec.n_c = n_c;
    rec.n_s = n_s;
    rec.n_h = std::accumulate(heavy.begin(), heavy.end(), std::int64_t{0});
    rec.h_est = h_est(static_cast<double>(rec.n_h), n_c, n_s, factor2);
    rec.heavy_fraction = static_cast<double>(rec.n_h) / (static_cast<double>(n_c) * n_s);
    rec.passed = rec.h_est > 2.0 / 3.0;
    all_passed = all_passed && rec.passed;
    if (all_passed) result.quantum_volume = std::int64_t{1} << n;
    result.records.push_back(rec);
  }
  return result;
}

// ---------------------------------------------------------------- randomized benchmarking

namespace {

bool equal_up_to_phase(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  return std::abs(std::abs((a.adjoint() * b).trace()) - 2.0) < 1e-9;
}

}  // namespace

const std::vector<Eigen::Matrix2cd>& clifford_group() {
  static const std::vector<Eigen::Matrix2cd> group = [] {
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::Matrix2cd h;
    h << s, s, s, -s;
    Eigen::Matrix2cd sg;
    sg << 1, 0, 0, cplx(0, 1);
    std::vector<Eigen::Matrix2cd> g = {Eigen::Matrix2cd::Identity()};
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (const auto& gen : {h, sg}) {
        const Eigen::Matrix2cd next = gen * g[i];
        if (std::none_of(g.begin(), g.end(), [&](const auto& e) { return equal_up_to_phase(e, next); })) {
          g.push_back(next);
        }
      }
    }
    if (g.size() != 24) throw ConsistencyError("Clifford enumeration did not close at 24 elements");
    return g;
  }();
  return group;
}

int clifford_index(const Eigen::Matrix2cd& m) {
  const auto& g = clifford_group();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (equal_up_to_phase(g[i], m)) return static_cast<int>(i);
  }
  return -1;
}

ExpFit fit_exponential(const std::vector<double>& x, const std::vector<double>& y) {
  ExpFit fit;
  if (x.size() != y.size() || x.size() < 2) {
    fit.message = "need at least two (x, y) points";
    return fit;
  }
  const std::size_t n = x.size();

  // Log-linear start with B fixed at 1/2.
  double b = 0.5;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = y[i] - b;
    if (d <= 1e-6) continue;
    const double ly = std::log(d);
    sx += x[i];
    sy += ly;
    sxx += x[i] * x[i];
    sxy += x[i] * ly;
    ++used;
  }
  double a = 0.5;
  double g = 0.99;
  if (used >= 2 && std::abs(used * sxx - sx * sx) > 1e-12) {
    const double slope = (used * sxy - sx * sy) / (used * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / used;
    g = std::clamp(std::exp(slope), 1e-6, 1.0);
    a = std::exp(icpt);
  } else if (used == 1) {
    a = sy > -50 ? std::exp(sy) : 0.5;
  }

  auto model = [](double A, double B, double G, double xi) { return A * std::pow(G, xi) + B; };
  auto sse = [&](double A, double B, double G) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - model(A, B, G, x[i]);
      s += r * r;
    }
    return s;
  };

  double cost = sse(a, b, g);
  double lambda = 1e-3;
  for (int iter = 0; iter < 500 && cost > 1e-30; ++iter) {
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const double gx = std::pow(g, x[i]);
      Eigen::Vector3d jrow(gx, 1.0, x[i] == 0 ? 0.0 : a * x[i] * std::pow(g, x[i] - 1));
      const double r = y[i] - (a * gx + b);
      jtj += jrow * jrow.transpose();
      jtr += jrow * r;
    }
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::Matrix3d damped = jtj;
      for (int k = 0; k < 3; ++k) damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      const Eigen::Vector3d step = damped.ldlt().solve(jtr);
      if (!step.allFinite()) break;
      const double na = a + step(0);
      const double nb = b + step(1);
      const double ng = std::clamp(g + step(2), 0.0, 1.0);
      const double nc = sse(na, nb, ng);
      if (nc < cost) {
        const double rel = (cost - nc) / std::max(cost, 1e-300);
        a = na;
        b = nb;
        g = ng;
        cost = nc;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = rel > 1e-14;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  fit.a = a;
  fit.b = b;
  fit.gamma = g;
  fit.ok = std::isfinite(a) && std::isfinite(b) && std::isfinite(g);
  if (!fit.ok) fit.message = "fit diverged";
  return fit;
}

std::string RbResult::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17) << "length,survival\n";
  for (std::size_t i = 0; i < lengths.size(); ++i) os << lengths[i] << ',' << survival[i] << '\n';
  return os.str();
}

nlohmann::json RbResult::to_json() const {
  return {{"lengths", lengths},
          {"survival", survival},
          {"survival_per_sequence", survival_per_sequence},
          {"fit", {{"A", fit.a}, {"B", fit.b}, {"gamma", fit.gamma}, {"ok", fit.ok}, {"message", fit.message}}},
          {"avg_gate_fidelity", avg_gate_fidelity}};
}

Circuit rb_sequence(int length, Rng& rng) {
  if (length < 0) throw ValidationError("sequence length must be non-negative");
  const auto& g = clifford_group();
  Circuit c(1, 1);
  Eigen::Matrix2cd total = Eigen::Matrix2cd::Identity();
  std::uniform_int_distribution<int> pick(0, static_cast<int>(g.size()) - 1);
  auto emit = [&c](const Eigen::Matrix2cd& m) {
    const ZyzAngles z = zyz_decompose(m);
    c.u(0, z.theta, z.phi, z.lambda);
  };
  for (int i = 0; i < length; ++i) {
    const auto& e = g[static_cast<std::size_t>(pick(rng))];
    emit(e);
    total = e * total;
  }
  const int inv = clifford_index(total.adjoint());
  if (inv < 0) throw ConsistencyError("sequence product left the Clifford group");
  emit(g[static_cast<std::size_t>(inv)]);
  c.measure(0, 0);
  return c;
}

RbResult rb_experiment(const std::vector<int>& lengths, int n_seq, std::int64_t shots, const NoiseModel& noise,
                       std::uint64_t seed) {
  if (lengths.size() < 2) throw ValidationError("randomized benchmarking needs at least two lengths");
  if (n_seq < 1 || shots < 1) throw ValidationError("n_seq and shots must be >= 1");
  RbResult res;
  res.lengths = lengths;
  res.survival_per_sequence.assign(lengths.size(), std::vector<double>(static_cast<std::size_t>(n_seq), 0.0));
  const std::size_t jobs = lengths.size() * static_cast<std::size_t>(n_seq);
  parallel_for(jobs, [&](std::size_t job) {
    const std::size_t li = job / static_cast<std::size_t>(n_seq);
    const std::size_t si = job % static_cast<std::size_t>(n_seq);
    Rng rng = derive_stream(seed, job);
    const Circuit c = rb_sequence(lengths[li], rng);
    const auto hist = sample(c, shots, &noise, splitmix64(seed ^ (job + 1)));
    res.survival_per_sequence[li][si] = hist.frequency("0");
  });
  std::vector<double> x;
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    const auto& v = res.survival_per_sequence[li];
    res.survival.push_back(std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()));
    x.push_back(lengths[li]);
  }
  res.fit = fit_exponential(x, res.survival);
  res.avg_gate_fidelity = 0.5 + 0.5 * res.fit.gamma;
  return res;
}

}  // namespace qemul
