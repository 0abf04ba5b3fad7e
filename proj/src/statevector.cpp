#include "qemul/statevector.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>

namespace qemul {

namespace {

std::atomic<int> g_qubit_cap{kDefaultQubitCap};

// Inserts a zero bit at position `bit` into `x`.
inline std::size_t insert_zero(std::size_t x, int bit) {
  const std::size_t low = x & ((std::size_t{1} << bit) - 1);
  return ((x >> bit) << (bit + 1)) | low;
}

void check_qubit(const StateVector& s, int q) {
  if (q < 0 || q >= s.n_qubits()) throw ValidationError("qubit index " + std::to_string(q) + " out of range");
}

}  // namespace

int qubit_cap() { return g_qubit_cap.load(); }
void set_qubit_cap(int cap) {
  if (cap < 1 || cap > 40) throw ValidationError("qubit cap must be in [1, 40]");
  g_qubit_cap.store(cap);
}

StateVector::StateVector(int n_qubits) : n_(n_qubits) {
  if (n_qubits < 0) throw ValidationError("negative qubit count");
  if (n_qubits > qubit_cap()) {
    throw CapacityError("state of " + std::to_string(n_qubits) + " qubits exceeds the configured cap of " +
                        std::to_string(qubit_cap()));
  }
  amps_.assign(std::size_t{1} << n_qubits, cplx(0.0, 0.0));
  amps_[0] = 1.0;
}

StateVector init_state(int n_qubits) {
  if (n_qubits < 1) throw ValidationError("state needs at least one qubit");
  return StateVector(n_qubits);
}

double StateVector::norm_squared() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return s;
}

void StateVector::normalize() {
  const double n = std::sqrt(norm_squared());
  if (n == 0.0) throw ConsistencyError("cannot normalize a zero state");
  const double inv = 1.0 / n;
  for (auto& a : amps_) a *= inv;
}

void StateVector::apply_1q(const Mat2& m, int q) {
  const std::size_t stride = std::size_t{1} << q;
  const std::size_t d = dim();
  for (std::size_t hi = 0; hi < d; hi += 2 * stride) {
    for (std::size_t lo = 0; lo < stride; ++lo) {
      const std::size_t i0 = hi + lo;
      const std::size_t i1 = i0 + stride;
      const cplx a0 = amps_[i0];
      const cplx a1 = amps_[i1];
      amps_[i0] = m[0] * a0 + m[1] * a1;
      amps_[i1] = m[2] * a0 + m[3] * a1;
    }
  }
}

void StateVector::apply_2q(const Mat4& m, int first, int second) {
  const int lo_bit = std::min(first, second);
  const int hi_bit = std::max(first, second);
  const std::size_t bf = std::size_t{1} << first;
  const std::size_t bs = std::size_t{1} << second;
  const std::size_t quarter = dim() >> 2;
  for (std::size_t k = 0; k < quarter; ++k) {
    const std::size_t base = insert_zero(insert_zero(k, lo_bit), hi_bit);
    const std::size_t idx[4] = {base, base | bs, base | bf, base | bf | bs};
    cplx in[4];
    for (int r = 0; r < 4; ++r) in[r] = amps_[idx[r]];
    for (int r = 0; r < 4; ++r) {
      amps_[idx[r]] = m[4 * r] * in[0] + m[4 * r + 1] * in[1] + m[4 * r + 2] * in[2] + m[4 * r + 3] * in[3];
    }
  }
}

void StateVector::apply_cx(int control, int target) {
  const int lo_bit = std::min(control, target);
  const int hi_bit = std::max(control, target);
  const std::size_t bc = std::size_t{1} << control;
  const std::size_t bt = std::size_t{1} << target;
  const std::size_t quarter = dim() >> 2;
  for (std::size_t k = 0; k < quarter; ++k) {
    const std::size_t base = insert_zero(insert_zero(k, lo_bit), hi_bit) | bc;
    std::swap(amps_[base], amps_[base | bt]);
  }
}

void StateVector::apply_x(int q) {
  const std::size_t stride = std::size_t{1} << q;
  for (std::size_t hi = 0; hi < dim(); hi += 2 * stride) {
    for (std::size_t lo = 0; lo < stride; ++lo) std::swap(amps_[hi + lo], amps_[hi + lo + stride]);
  }
}

void StateVector::apply_matrix(std::span<const cplx> m, std::span<const int> targets) {
  const int k = static_cast<int>(targets.size());
  const std::size_t local = std::size_t{1} << k;
  if (m.size() != local * local) throw ValidationError("operator dimension does not match target count");
  if (k == 1) {
    apply_1q({m[0], m[1], m[2], m[3]}, targets[0]);
    return;
  }
  if (k == 2) {
    Mat4 m4;
    std::copy(m.begin(), m.end(), m4.begin());
    apply_2q(m4, targets[0], targets[1]);
    return;
  }
  std::vector<int> sorted(targets.begin(), targets.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> offsets(local, 0);
  for (std::size_t l = 0; l < local; ++l) {
    for (int j = 0; j < k; ++j) {
      if ((l >> (k - 1 - j)) & 1) offsets[l] |= std::size_t{1} << targets[j];
    }
  }
  std::vector<cplx> in(local);
  const std::size_t outer = dim() >> k;
  for (std::size_t o = 0; o < outer; ++o) {
    std::size_t base = o;
    for (int b : sorted) base = insert_zero(base, b);
    for (std::size_t l = 0; l < local; ++l) in[l] = amps_[base | offsets[l]];
    for (std::size_t r = 0; r < local; ++r) {
      cplx acc = 0.0;
      for (std::size_t c = 0; c < local; ++c) acc += m[r * local + c] * in[c];
      amps_[base | offsets[r]] = acc;
    }
  }
}

double StateVector::prob_zero(int q) const {
  const std::size_t stride = std::size_t{1} << q;
  double p = 0.0;
  for (std::size_t hi = 0; hi < dim(); hi += 2 * stride) {
    for (std::size_t lo = 0; lo < stride; ++lo) p += std::norm(amps_[hi + lo]);
  }
  return p;
}

void StateVector::collapse(int q, int bit, double p) {
  const std::size_t stride = std::size_t{1} << q;
  const double scale = 1.0 / std::sqrt(p);
  for (std::size_t hi = 0; hi < dim(); hi += 2 * stride) {
    for (std::size_t lo = 0; lo < stride; ++lo) {
      cplx& keep = amps_[hi + lo + (bit ? stride : 0)];
      cplx& drop = amps_[hi + lo + (bit ? 0 : stride)];
      keep *= scale;
      drop = 0.0;
    }
  }
}

std::vector<double> StateVector::probabilities() const {
  std::vector<double> p(dim());
  for (std::size_t i = 0; i < dim(); ++i) p[i] = std::norm(amps_[i]);
  return p;
}

Mat2 u_matrix(double theta, double phi, double lambda) {
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  return {cplx(c, 0.0), -std::polar(s, lambda), std::polar(s, phi), std::polar(c, phi + lambda)};
}

Mat2 rx_matrix(double theta) {
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  return {cplx(c, 0), cplx(0, -s), cplx(0, -s), cplx(c, 0)};
}

Mat2 ry_matrix(double theta) {
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  return {cplx(c, 0), cplx(-s, 0), cplx(s, 0), cplx(c, 0)};
}

Mat2 rz_matrix(double theta) {
  return {std::polar(1.0, -theta / 2), cplx(0, 0), cplx(0, 0), std::polar(1.0, theta / 2)};
}

Mat2 r_matrix(double theta, double phi) {
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  const cplx mi(0, -1);
  return {cplx(c, 0), mi * std::polar(s, -phi), mi * std::polar(s, phi), cplx(c, 0)};
}

Mat4 rxx_matrix(double theta) {
  const cplx c(std::cos(theta), 0);
  const cplx s(0, -std::sin(theta));
  return {c, 0, 0, s,  //
          0, c, s, 0,  //
          0, s, c, 0,  //
          s, 0, 0, c};
}

Mat4 rzz_matrix(double theta) {
  const cplx a = std::polar(1.0, -theta);
  const cplx b = std::polar(1.0, theta);
  return {a, 0, 0, 0,  //
          0, b, 0, 0,  //
          0, 0, b, 0,  //
          0, 0, 0, a};
}

Mat4 cx_matrix() {
  return {1, 0, 0, 0,  //
          0, 1, 0, 0,  //
          0, 0, 0, 1,  //
          0, 0, 1, 0};
}

void apply_instruction(StateVector& state, const Instruction& ins) {
  for (int q : ins.qubits) check_qubit(state, q);
  const auto& p = ins.params;
  switch (ins.kind) {
    case GateKind::U:
      state.apply_1q(u_matrix(p[0], p[1], p[2]), ins.qubits[0]);
      break;
    case GateKind::CX:
      state.apply_cx(ins.qubits[0], ins.qubits[1]);
      break;
    case GateKind::R:
      state.apply_1q(r_matrix(p[0], p[1]), ins.qubits[0]);
      break;
    case GateKind::RX:
      state.apply_1q(rx_matrix(p[0]), ins.qubits[0]);
      break;
    case GateKind::RY:
      state.apply_1q(ry_matrix(p[0]), ins.qubits[0]);
      break;
    case GateKind::RZ:
      state.apply_1q(rz_matrix(p[0]), ins.qubits[0]);
      break;
    case GateKind::RXX:
      state.apply_2q(rxx_matrix(p[0]), ins.qubits[0], ins.qubits[1]);
      break;
    case GateKind::RZZ:
      state.apply_2q(rzz_matrix(p[0]), ins.qubits[0], ins.qubits[1]);
      break;
    case GateKind::Barrier:
      break;
    case GateKind::Measure:
    case GateKind::Reset:
      throw ValidationError(std::string(kind_name(ins.kind)) + " is not a unitary instruction");
  }
}

int measure_qubit(StateVector& state, int q, Rng& rng) {
  check_qubit(state, q);
  double p0 = state.prob_zero(q);
  if (p0 < -1e-9 || p0 > 1.0 + 1e-9 || std::isnan(p0)) {
    throw ConsistencyError("measurement probability " + std::to_string(p0) + " outside [0,1]");
  }
  p0 = std::clamp(p0, 0.0, 1.0);
  const int bit = uniform01(rng) < p0 ? 0 : 1;
  state.collapse(q, bit, bit == 0 ? p0 : 1.0 - p0);
  return bit;
}

double expectation_pauli(const StateVector& state, std::string_view pauli) {
  const int n = state.n_qubits();
  if (static_cast<int>(pauli.size()) != n) throw ValidationError("Pauli string length must equal the qubit count");
  std::size_t xmask = 0;
  std::size_t zmask = 0;
  int y_count = 0;
  for (int q = 0; q < n; ++q) {
    const char c = pauli[n - 1 - q];
    const std::size_t bit = std::size_t{1} << q;
    switch (c) {
      case 'I':
        break;
      case 'X':
        xmask |= bit;
        break;
      case 'Y':
        xmask |= bit;
        zmask |= bit;
        ++y_count;
        break;
      case 'Z':
        zmask |= bit;
        break;
      default:
        throw ValidationError(std::string("invalid Pauli letter '") + c + "'");
    }
  }
  // P|j> = i^{#Y} (-1)^{popcount(j & zmask)} |j ^ xmask>
  static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const cplx phase = ipow[y_count % 4];
  const auto amps = state.amplitudes();
  cplx acc = 0.0;
  for (std::size_t j = 0; j < amps.size(); ++j) {
    const double sign = (std::popcount(j & zmask) & 1) ? -1.0 : 1.0;
    acc += std::conj(amps[j ^ xmask]) * amps[j] * sign;
  }
  return (acc * phase).real();
}

}  // namespace qemul
