#include "qemul/photonic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "qemul/parallel.hpp"

namespace qemul {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

cplx ipow(cplx base, int e) {
  cplx out(1.0, 0.0);
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

void check_mode(const FockState& s, int mode) {
  if (mode < 0 || mode >= s.n_modes()) throw ValidationError("mode index " + std::to_string(mode) + " out of range");
}

// Samples an index from non-negative weights.
std::size_t sample_index(const std::vector<double>& w, Rng& rng) {
  double total = 0.0;
  for (double x : w) total += x;
  if (!(total > 0.0)) throw ConsistencyError("sampling weights vanish");
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    last = i;
    acc += w[i];
    if (u < acc) return i;
  }
  return last;
}

}  // namespace

cplx FockState::amplitude(const Occupation& occ) const {
  auto it = amps_.find(occ);
  return it == amps_.end() ? cplx(0.0, 0.0) : it->second;
}

double FockState::norm_squared() const {
  double s = 0.0;
  for (const auto& [k, a] : amps_) s += std::norm(a);
  return s;
}

void FockState::normalize() {
  const double n = std::sqrt(norm_squared());
  if (n == 0.0) throw ConsistencyError("cannot normalize an empty Fock state");
  for (auto& [k, a] : amps_) a /= n;
}

double FockState::mode_probability(int mode, int n) const {
  double p = 0.0;
  for (const auto& [occ, a] : amps_) {
    if (occ[static_cast<std::size_t>(mode)] == n) p += std::norm(a);
  }
  return p;
}

void FockState::prune(double eps) {
  std::erase_if(amps_, [eps](const auto& kv) { return std::norm(kv.second) < eps; });
}

FockState fock_init(const Occupation& occupations, int ceiling) {
  int total = 0;
  for (int n : occupations) {
    if (n < 0) throw ValidationError("occupations must be non-negative");
    total += n;
  }
  if (total > ceiling) {
    throw CapacityError("photon number " + std::to_string(total) + " exceeds ceiling " + std::to_string(ceiling));
  }
  FockState s(static_cast<int>(occupations.size()), ceiling);
  s.amplitudes()[occupations] = 1.0;
  return s;
}

void apply_phase(FockState& state, int mode, double theta) {
  check_mode(state, mode);
  for (auto& [occ, a] : state.amplitudes()) a *= std::polar(1.0, theta * occ[static_cast<std::size_t>(mode)]);
}

void apply_beamsplitter(FockState& state, int m1, int m2, double theta, double phi) {
  check_mode(state, m1);
  check_mode(state, m2);
  if (m1 == m2) throw ValidationError("beamsplitter needs two distinct modes");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const cplx to2 = std::polar(s, phi);    // a1^dag -> c a1^dag + to2 a2^dag
  const cplx to1 = -std::polar(s, -phi);  // a2^dag -> c a2^dag + to1 a1^dag
  std::map<Occupation, cplx> out;
  for (const auto& [occ, amp] : state.amplitudes()) {
    const int n1 = occ[static_cast<std::size_t>(m1)];
    const int n2 = occ[static_cast<std::size_t>(m2)];
    const double inv_norm = 1.0 / std::sqrt(factorial(n1) * factorial(n2));
    Occupation target = occ;
    for (int j = 0; j <= n1; ++j) {
      const cplx cj = binomial(n1, j) * std::pow(c, j) * ipow(to2, n1 - j);
      for (int k = 0; k <= n2; ++k) {
        const cplx ck = binomial(n2, k) * std::pow(c, k) * ipow(to1, n2 - k);
        const int p = j + n2 - k;
        const int q = n1 - j + k;
        target[static_cast<std::size_t>(m1)] = p;
        target[static_cast<std::size_t>(m2)] = q;
        out[target] += amp * cj * ck * std::sqrt(factorial(p) * factorial(q)) * inv_norm;
      }
    }
  }
  state.amplitudes() = std::move(out);
  state.prune();
}

int detect(FockState& state, int mode, double dark_prob, Rng& rng) {
  check_mode(state, mode);
  if (!(dark_prob >= 0.0 && dark_prob <= 1.0)) throw ValidationError("dark_prob must lie in [0,1]");
  const auto idx = static_cast<std::size_t>(mode);
  std::vector<double> pn(static_cast<std::size_t>(state.ceiling()) + 1, 0.0);
  for (const auto& [occ, a] : state.amplitudes()) pn[static_cast<std::size_t>(occ[idx])] += std::norm(a);
  const int n = static_cast<int>(sample_index(pn, rng));
  std::map<Occupation, cplx> out;
  for (const auto& [occ, a] : state.amplitudes()) {
    if (occ[idx] != n) continue;
    Occupation rest = occ;
    rest[idx] = 0;
    out[rest] = a;
  }
  state.amplitudes() = std::move(out);
  state.normalize();
  const bool dark = dark_prob > 0.0 && uniform01(rng) < dark_prob;
  return n + (dark ? 1 : 0);
}

int apply_loss(FockState& state, int mode, double r, Rng& rng) {
  check_mode(state, mode);
  if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("loss probability must lie in [0,1]");
  if (r == 0.0) return 0;
  const auto idx = static_cast<std::size_t>(mode);
  auto weight = [r](int n, int k) { return binomial(n, k) * std::pow(r, k) * std::pow(1.0 - r, n - k); };
  std::vector<double> pk(static_cast<std::size_t>(state.ceiling()) + 1, 0.0);
  for (const auto& [occ, a] : state.amplitudes()) {
    for (int k = 0; k <= occ[idx]; ++k) pk[static_cast<std::size_t>(k)] += std::norm(a) * weight(occ[idx], k);
  }
  const int k = static_cast<int>(sample_index(pk, rng));
  std::map<Occupation, cplx> out;
  for (const auto& [occ, a] : state.amplitudes()) {
    if (occ[idx] < k) continue;
    const double w = weight(occ[idx], k);
    if (w == 0.0) continue;
    Occupation next = occ;
    next[idx] -= k;
    out[next] = a * std::sqrt(w);
  }
  state.amplitudes() = std::move(out);
  state.normalize();
  return k;
}

cplx permanent(const CMat& a) {
  if (a.rows() != a.cols()) throw ValidationError("permanent needs a square matrix");
  const int n = static_cast<int>(a.rows());
  if (n == 0) return 1.0;
  if (n > 30) throw CapacityError("permanent limited to n <= 30");
  std::vector<cplx> rowsum(static_cast<std::size_t>(n), 0.0);
  cplx total = 0.0;
  std::uint64_t gray = 0;
  const std::uint64_t limit = std::uint64_t{1} << n;
  for (std::uint64_t g = 1; g < limit; ++g) {
    const int j = std::countr_zero(g);
    const std::uint64_t next = g ^ (g >> 1);
    const bool added = (next >> j) & 1;
    gray = next;
    for (int i = 0; i < n; ++i) {
      if (added) {
        rowsum[static_cast<std::size_t>(i)] += a(i, j);
      } else {
        rowsum[static_cast<std::size_t>(i)] -= a(i, j);
      }
    }
    cplx prod = 1.0;
    for (const auto& v : rowsum) prod *= v;
    total += (std::popcount(gray) & 1) ? -prod : prod;
  }
  return (n & 1) ? -total : total;
}

namespace {

std::vector<int> expand_modes(const Occupation& occ) {
  std::vector<int> modes;
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (occ[i] < 0) throw ValidationError("occupations must be non-negative");
    for (int k = 0; k < occ[i]; ++k) modes.push_back(static_cast<int>(i));
  }
  return modes;
}

}  // namespace

double bs_probability(const CMat& u, const Occupation& input, const Occupation& output) {
  if (static_cast<Eigen::Index>(input.size()) != u.cols() || static_cast<Eigen::Index>(output.size()) != u.rows()) {
    throw ValidationError("occupation length does not match the interferometer size");
  }
  const auto cols = expand_modes(input);
  const auto rows = expand_modes(output);
  if (cols.size() != rows.size()) throw ValidationError("input and output photon numbers differ");
  const auto n = static_cast<Eigen::Index>(cols.size());
  CMat sub(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) sub(r, c) = u(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
  double norm = 1.0;
  for (int x : input) norm *= factorial(x);
  for (int x : output) norm *= factorial(x);
  return std::norm(permanent(sub)) / norm;
}

namespace {

// One Clifford-Clifford draw for photons entering `cols`.
std::vector<int> clifford_clifford(const CMat& u, std::vector<int> cols, Rng& rng) {
  const int m = static_cast<int>(u.rows());
  const int n = static_cast<int>(cols.size());
  std::shuffle(cols.begin(), cols.end(), rng);
  CMat a(m, n);
  for (int c = 0; c < n; ++c) a.col(c) = u.col(cols[static_cast<std::size_t>(c)]);

  std::vector<int> r;
  r.reserve(static_cast<std::size_t>(n));
  std::vector<double> w(static_cast<std::size_t>(m));
  for (int k = 1; k <= n; ++k) {
    // Per of rows r[0..k-2] and columns [k] \ {l}, for each l.
    std::vector<cplx> perms(static_cast<std::size_t>(k));
    CMat sub(k - 1, k - 1);
    for (int l = 0; l < k; ++l) {
      for (int row = 0; row < k - 1; ++row) {
        int cc = 0;
        for (int col = 0; col < k; ++col) {
          if (col == l) continue;
          sub(row, cc++) = a(r[static_cast<std::size_t>(row)], col);
        }
      }
      perms[static_cast<std::size_t>(l)] = permanent(sub);
    }
    for (int i = 0; i < m; ++i) {
      cplx acc = 0.0;
      for (int l = 0; l < k; ++l) acc += a(i, l) * perms[static_cast<std::size_t>(l)];
      w[static_cast<std::size_t>(i)] = std::norm(acc);
    }
    r.push_back(static_cast<int>(sample_index(w, rng)));
  }
  return r;
}

}  // namespace

std::vector<Occupation> bs_sample(const CMat& u, const Occupation& input, std::int64_t n_samples, const BsNoise& noise,
                                  std::uint64_t seed) {
  check_unitary(u, 1e-8);
  const int m = static_cast<int>(u.rows());
  if (static_cast<int>(input.size()) != m) throw ValidationError("input occupation length must equal the mode count");
  const auto photons = expand_modes(input);
  if (static_cast<int>(photons.size()) > kMaxBsPhotons) {
    throw CapacityError("boson sampling limited to " + std::to_string(kMaxBsPhotons) + " photons");
  }
  if (n_samples < 0) throw ValidationError("sample count must be non-negative");
  if (!noise.loss.empty() && static_cast<int>(noise.loss.size()) != m) {
    throw ValidationError("loss list must have one entry per mode");
  }
  for (double l : noise.loss) {
    if (!(l >= 0.0 && l <= 1.0)) throw ValidationError("loss probabilities must lie in [0,1]");
  }
  if (!(noise.eta >= 0.0 && noise.eta <= 1.0)) throw ValidationError("eta must lie in [0,1]");
  if (!(noise.dark_prob >= 0.0 && noise.dark_prob <= 1.0)) throw ValidationError("dark_prob must lie in [0,1]");

  std::vector<std::vector<double>> column_weights(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    auto& cw = column_weights[static_cast<std::size_t>(j)];
    cw.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) cw[static_cast<std::size_t>(i)] = std::norm(u(i, j));
  }

  std::vector<Occupation> out(static_cast<std::size_t>(n_samples));
  parallel_for(out.size(), [&](std::size_t idx) {
    Rng rng = derive_stream(seed, idx);
    Occupation occ(static_cast<std::size_t>(m), 0);
    std::vector<int> joint;
    for (int j : photons) {
      if (noise.eta < 1.0 && uniform01(rng) >= noise.eta) {
        ++occ[sample_index(column_weights[static_cast<std::size_t>(j)], rng)];
      } else {
        joint.push_back(j);
      }
    }
    for (int mode : clifford_clifford(u, joint, rng)) ++occ[static_cast<std::size_t>(mode)];
    for (int i = 0; i < m && !noise.loss.empty(); ++i) {
      const double l = noise.loss[static_cast<std::size_t>(i)];
      if (l <= 0.0) continue;
      int kept = 0;
      for (int p = 0; p < occ[static_cast<std::size_t>(i)]; ++p) kept += uniform01(rng) >= l ? 1 : 0;
      occ[static_cast<std::size_t>(i)] = kept;
    }
    if (noise.dark_prob > 0.0) {
      for (auto& c : occ) c += uniform01(rng) < noise.dark_prob ? 1 : 0;
    }
    out[idx] = std::move(occ);
  });
  return out;
}

std::string occupation_string(const Occupation& occ) {
  const bool wide = std::any_of(occ.begin(), occ.end(), [](int x) { return x > 9; });
  std::string s;
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (wide && i > 0) s += ',';
    s += std::to_string(occ[i]);
  }
  return s;
}

Occupation parse_occupation(const std::string& text) {
  Occupation occ;
  if (text.find(',') != std::string::npos) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
        throw ValidationError("malformed occupation '" + text + "'");
      }
      occ.push_back(std::stoi(item));
    }
    return occ;
  }
  for (char ch : text) {
    if (ch < '0' || ch > '9') throw ValidationError("malformed occupation '" + text + "'");
    occ.push_back(ch - '0');
  }
  return occ;
}

void check_unitary(const CMat& u, double tol) {
  if (u.rows() != u.cols() || u.rows() == 0) throw ValidationError("interferometer matrix must be square and non-empty");
  const CMat err = u.adjoint() * u - CMat::Identity(u.rows(), u.cols());
  const double dev = err.cwiseAbs().maxCoeff();
  if (dev > tol) {
    throw ValidationError("interferometer is not unitary (max |U^dag U - I| = " + std::to_string(dev) + ")");
  }
}

CMat interferometer_from_json(const nlohmann::json& j, double tol) {
  if (!j.is_object() || !j.contains("unitary") || !j.at("unitary").is_array()) {
    throw ValidationError("interferometer JSON needs a 'unitary' array");
  }
  const auto& rows = j.at("unitary");
  const auto m = static_cast<Eigen::Index>(rows.size());
  CMat u(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto& row = rows.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m) throw ValidationError("unitary must be square");
    for (Eigen::Index c = 0; c < m; ++c) {
      const auto& e = row.at(static_cast<std::size_t>(c));
      if (e.is_number()) {
        u(r, c) = e.get<double>();
      } else if (e.is_object()) {
        u(r, c) = cplx(e.value("re", 0.0), e.value("im", 0.0));
      } else {
        throw ValidationError("unitary entries must be numbers or {re, im} objects");
      }
    }
  }
  check_unitary(u, tol);
  return u;
}

nlohmann::json interferometer_to_json(const CMat& u) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < u.cols(); ++c) row.push_back({{"re", u(r, c).real()}, {"im", u(r, c).imag()}});
    rows.push_back(row);
  }
  return {{"unitary", rows}};
}

CMat fourier_interferometer(int m) {
  CMat u(m, m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) u(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(m)), 2.0 * kPi * j * k / m);
  return u;
}

FockState klm_cnot_state(int input) {
  if (input < 0 || input > 3) throw ValidationError("computational input must be 0..3");
  Occupation occ(6, 0);
  occ[static_cast<std::size_t>(input >> 1)] = 1;
  occ[static_cast<std::size_t>(2 + (input & 1))] = 1;
  FockState s = fock_init(occ, 2);
  const double third = std::acos(1.0 / std::sqrt(3.0));  // cos^2 = 1/3
  apply_beamsplitter(s, 2, 3, kPi / 4, 0.0);
  apply_beamsplitter(s, 1, 2, third, 0.0);
  apply_beamsplitter(s, 0, 4, third, 0.0);
  apply_beamsplitter(s, 3, 5, third, 0.0);
  apply_beamsplitter(s, 2, 3, -kPi / 4, 0.0);
  return s;
}

KlmCnotResult klm_cnot_demo(std::int64_t shots, std::uint64_t seed) {
  if (shots < 0) throw ValidationError("shot count must be non-negative");
  const std::array<FockState, 4> states = {klm_cnot_state(0), klm_cnot_state(1), klm_cnot_state(2), klm_cnot_state(3)};
  const std::size_t n_chunks = static_cast<std::size_t>(std::min<std::int64_t>(std::max<std::int64_t>(shots, 1), 64));
  std::vector<KlmCnotResult> partial(n_chunks);
  parallel_for(n_chunks, [&](std::size_t chunk) {
    const auto begin = static_cast<std::int64_t>(chunk) * shots / static_cast<std::int64_t>(n_chunks);
    const auto end = static_cast<std::int64_t>(chunk + 1) * shots / static_cast<std::int64_t>(n_chunks);
    auto& res = partial[chunk];
    for (std::int64_t s = begin; s < end; ++s) {
      Rng rng = derive_stream(seed, static_cast<std::uint64_t>(s));
      const int input = static_cast<int>(s % 4);
      FockState st = states[static_cast<std::size_t>(input)];
      std::array<int, 6> counts{};
      for (int mode = 0; mode < 6; ++mode) counts[static_cast<std::size_t>(mode)] = detect(st, mode, 0.0, rng);
      ++res.shots;
      if (counts[0] + counts[1] == 1 && counts[2] + counts[3] == 1) {
        ++res.successes;
        ++res.table[static_cast<std::size_t>(input)][static_cast<std::size_t>(2 * counts[1] + counts[3])];
      }
    }
  });
  KlmCnotResult total;
  for (const auto& r : partial) {
    total.shots += r.shots;
    total.successes += r.successes;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) total.table[i][j] += r.table[i][j];
  }
  return total;
}

}  // namespace qemul
