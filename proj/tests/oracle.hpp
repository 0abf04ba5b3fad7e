#pragma once

// Dense reference implementations written independently of the library kernels.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "qemul/qasm.hpp"

namespace oracle {

using cd = std::complex<double>;
using M = Eigen::MatrixXcd;
constexpr double pi = 3.14159265358979323846;
const cd I1(0.0, 1.0);

inline M pauli(char c) {
  M m(2, 2);
  if (c == 'X') m << 0, 1, 1, 0;
  else if (c == 'Y') m << 0, -I1, I1, 0;
  else if (c == 'Z') m << 1, 0, 0, -1;
  else m = M::Identity(2, 2);
  return m;
}

inline M kron(const M& a, const M& b) {
  M out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Leftmost letter acts on the highest qubit.
inline M pauli_string(const std::string& p) {
  M m = M::Identity(1, 1);
  for (char c : p) m = kron(m, pauli(c));
  return m;
}

// exp(-i a G) for G with G^2 = I.
inline M involution_exp(const M& g, double a) {
  return std::cos(a) * M::Identity(g.rows(), g.cols()) - I1 * std::sin(a) * g;
}

inline M gate(qemul::GateKind kind, const std::vector<double>& p) {
  using qemul::GateKind;
  M m;
  switch (kind) {
    case GateKind::U: {
      const double t = p[0], f = p[1], l = p[2];
      m.resize(2, 2);
      m << std::cos(t / 2), -std::exp(I1 * l) * std::sin(t / 2), std::exp(I1 * f) * std::sin(t / 2),
          std::exp(I1 * (f + l)) * std::cos(t / 2);
      return m;
    }
    case GateKind::CX:
      m = M::Zero(4, 4);
      m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
      return m;
    case GateKind::R:
      return involution_exp(std::cos(p[1]) * pauli('X') + std::sin(p[1]) * pauli('Y'), p[0] / 2);
    case GateKind::RX:
      return involution_exp(pauli('X'), p[0] / 2);
    case GateKind::RY:
      return involution_exp(pauli('Y'), p[0] / 2);
    case GateKind::RZ:
      return involution_exp(pauli('Z'), p[0] / 2);
    case GateKind::RXX:
      return involution_exp(pauli_string("XX"), p[0]);
    case GateKind::RZZ:
      return involution_exp(pauli_string("ZZ"), p[0]);
    default:
      return M::Identity(1, 1);
  }
}

// Lifts a k-qubit operator onto n qubits; qubits[0] is the most significant local bit.
inline M embed(const M& g, const std::vector<int>& qubits, int n) {
  const std::size_t dim = std::size_t{1} << n;
  const int k = static_cast<int>(qubits.size());
  std::size_t mask = 0;
  for (int q : qubits) mask |= std::size_t{1} << q;
  auto local = [&](std::size_t x) {
    std::size_t l = 0;
    for (int j = 0; j < k; ++j) l = (l << 1) | ((x >> qubits[static_cast<std::size_t>(j)]) & 1);
    return static_cast<Eigen::Index>(l);
  };
  M out = M::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c)
      if ((r & ~mask) == (c & ~mask)) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = g(local(r), local(c));
  return out;
}

inline M circuit(const qemul::Circuit& c) {
  const Eigen::Index dim = Eigen::Index{1} << c.n_qubits;
  M u = M::Identity(dim, dim);
  for (const auto& ins : c.instructions) {
    if (!qemul::is_unitary(ins.kind) || ins.kind == qemul::GateKind::Barrier) continue;
    u = embed(gate(ins.kind, ins.params), ins.qubits, c.n_qubits) * u;
  }
  return u;
}

inline std::vector<double> diag_probs(const M& rho) {
  std::vector<double> p(static_cast<std::size_t>(rho.rows()));
  for (Eigen::Index i = 0; i < rho.rows(); ++i) p[static_cast<std::size_t>(i)] = rho(i, i).real();
  return p;
}

// Superoperator of a channel on n qubits: vec(K rho K^dag) = (conj(K) (x) K) vec(rho), column stacking.
inline M superop(const std::vector<M>& kraus, const std::vector<int>& qubits, int n) {
  const Eigen::Index d = Eigen::Index{1} << n;
  M s = M::Zero(d * d, d * d);
  for (const auto& k : kraus) {
    const M big = embed(k, qubits, n);
    s += kron(big.conjugate(), big);
  }
  return s;
}

inline M unitary_superop(const M& u) { return kron(u.conjugate(), u); }

inline M vec(const M& rho) {
  M v(rho.size(), 1);
  for (Eigen::Index c = 0; c < rho.cols(); ++c)
    for (Eigen::Index r = 0; r < rho.rows(); ++r) v(c * rho.rows() + r, 0) = rho(r, c);
  return v;
}

inline M unvec(const M& v, Eigen::Index d) {
  M rho(d, d);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = 0; r < d; ++r) rho(r, c) = v(c * d + r, 0);
  return rho;
}

// Sum over all permutations.
inline cd naive_permanent(const M& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  cd total = 0.0;
  do {
    cd prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= a(i, perm[static_cast<std::size_t>(i)]);
    total += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return n == 0 ? cd(1.0) : total;
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s / 2;
}

}  // namespace oracle
