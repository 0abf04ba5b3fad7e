#include "qemul/linalg.hpp"

#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace qemul {

Eigen::Matrix2cd to_eigen(const Mat2& m) {
  Eigen::Matrix2cd out;
  out << m[0], m[1], m[2], m[3];
  return out;
}

Eigen::Matrix4cd to_eigen(const Mat4& m) {
  Eigen::Matrix4cd out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out(r, c) = m[static_cast<std::size_t>(4 * r + c)];
  return out;
}

CMat instruction_unitary(const Instruction& instr, int n_qubits) {
  Circuit c(n_qubits, 0);
  c.append(instr);
  return circuit_unitary(c);
}

CMat circuit_unitary(const Circuit& circuit) {
  const int n = circuit.n_qubits;
  const std::size_t dim = std::size_t{1} << n;
  CMat out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t col = 0; col < dim; ++col) {
    StateVector s(n);
    s[0] = 0.0;
    s[col] = 1.0;
    for (const auto& ins : circuit.instructions) {
      if (ins.kind == GateKind::Measure || ins.kind == GateKind::Barrier) continue;
      if (ins.kind == GateKind::Reset) throw ValidationError("reset has no unitary action");
      apply_instruction(s, ins);
    }
    for (std::size_t r = 0; r < dim; ++r) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = s[r];
  }
  return out;
}

ZyzAngles zyz_decompose(const Eigen::Matrix2cd& v_in) {
  const cplx det = v_in.determinant();
  if (std::abs(std::abs(det) - 1.0) > 1e-6) throw ValidationError("zyz_decompose expects a unitary matrix");
  const Eigen::Matrix2cd v = v_in;
  ZyzAngles a;
  const double m00 = std::abs(v(0, 0));
  const double m10 = std::abs(v(1, 0));
  a.theta = 2.0 * std::atan2(m10, m00);
  constexpr double eps = 1e-14;
  if (m10 < eps) {
    a.alpha = std::arg(v(0, 0));
    a.phi = 0.0;
    a.lambda = std::arg(v(1, 1)) - a.alpha;
  } else if (m00 < eps) {
    a.alpha = std::arg(v(1, 0));
    a.phi = 0.0;
    a.lambda = std::arg(-v(0, 1)) - a.alpha;
  } else {
    a.alpha = std::arg(v(0, 0));
    a.phi = std::arg(v(1, 0)) - a.alpha;
    a.lambda = std::arg(-v(0, 1)) - a.alpha;
  }
  return a;
}

CMat haar_unitary(int d, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMat z(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) z(r, c) = cplx(g(rng), g(rng)) / std::sqrt(2.0);
  Eigen::HouseholderQR<CMat> qr(z);
  CMat q = qr.householderQ() * CMat::Identity(d, d);
  const CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < d; ++c) {
    const cplx rii = r(c, c);
    const double mag = std::abs(rii);
    q.col(c) *= mag > 0 ? rii / mag : cplx(1.0, 0.0);
  }
  return q;
}

Eigen::Matrix4cd haar_su4(Rng& rng) {
  Eigen::Matrix4cd u = haar_unitary(4, rng);
  const cplx det = u.determinant();
  return u * std::polar(1.0, -std::arg(det) / 4.0);
}

namespace {

Eigen::Matrix4cd magic_basis() {
  const double s = 1.0 / std::sqrt(2.0);
  const cplx i(0, 1);
  Eigen::Matrix4cd b;
  b << 1, 0, 0, i,  //
      0, i, 1, 0,   //
      0, i, -1, 0,  //
      1, 0, 0, -i;
  return b * s;
}

// Splits k ~ a (x) b, returning the factors up to a shared scalar.
void factor_kron(const Eigen::Matrix4cd& k, Eigen::Matrix2cd& a, Eigen::Matrix2cd& b) {
  Eigen::Index r0 = 0;
  Eigen::Index c0 = 0;
  k.cwiseAbs().maxCoeff(&r0, &c0);
  const int ai = static_cast<int>(r0) / 2;
  const int bi = static_cast<int>(r0) % 2;
  const int aj = static_cast<int>(c0) / 2;
  const int bj = static_cast<int>(c0) % 2;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      a(x, y) = k(2 * x + bi, 2 * y + bj);
      b(x, y) = k(2 * ai + x, 2 * aj + y) / k(r0, c0);
    }
  a /= std::sqrt(a.determinant());
  b /= std::sqrt(b.determinant());
}

void append_local(Circuit& circuit, const Eigen::Matrix2cd& m, int q) {
  const ZyzAngles z = zyz_decompose(m);
  circuit.u(q, z.theta, z.phi, z.lambda);
}

}  // namespace

void append_two_qubit_unitary(Circuit& circuit, const Eigen::Matrix4cd& u, int first, int second) {
  const cplx det = u.determinant();
  if (std::abs(std::abs(det) - 1.0) > 1e-8) throw ValidationError("two-qubit block is not unitary");
  const Eigen::Matrix4cd up = u * std::polar(1.0, -std::arg(det) / 4.0);
  const Eigen::Matrix4cd mb = magic_basis();
  const Eigen::Matrix4cd um = mb.adjoint() * up * mb;
  const Eigen::Matrix4cd m = um.transpose() * um;

  // Real and imaginary parts of the symmetric unitary m commute; diagonalize a generic combination.
  Eigen::Matrix4d p;
  Eigen::Vector4cd dvals;
  bool ok = false;
  for (double x : {0.6180339887498949, 1.4142135623730951, 2.718281828459045, 0.3183098861837907, 5.0}) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m.real() + x * m.imag());
    p = es.eigenvectors();
    const Eigen::Matrix4cd dm = p.transpose().cast<cplx>() * m * p.cast<cplx>();
    double off = 0.0;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        if (r != c) off = std::max(off, std::abs(dm(r, c)));
    if (off < 1e-9) {
      dvals = dm.diagonal();
      ok = true;
      break;
    }
  }
  if (!ok) throw ConsistencyError("failed to diagonalize two-qubit block");
  if (p.determinant() < 0) {
    p.col(0) *= -1.0;
  }
  Eigen::Vector4d theta;
  for (int k = 0; k < 4; ++k) theta(k) = std::arg(dvals(k)) / 2.0;
  auto k1_of = [&](const Eigen::Vector4d& th) {
    Eigen::Matrix4cd phase = Eigen::Matrix4cd::Zero();
    for (int k = 0; k < 4; ++k) phase(k, k) = std::polar(1.0, -th(k));
    return Eigen::Matrix4cd(um * p.cast<cplx>() * phase);
  };
  Eigen::Matrix4cd k1 = k1_of(theta);
  if (k1.real().determinant() < 0) {
    theta(0) += kPi;
    k1 = k1_of(theta);
  }

  // Middle factor exp(i(a XX + b YY + c ZZ)) is diagonal in the magic basis.
  const Eigen::Matrix2cd X = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
  const Eigen::Matrix2cd Y = (Eigen::Matrix2cd() << 0, cplx(0, -1), cplx(0, 1), 0).finished();
  const Eigen::Matrix2cd Z = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
  auto kron2 = [](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Eigen::Matrix4cd out;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
  };
  const Eigen::Matrix4cd xx = kron2(X, X);
  const Eigen::Matrix4cd yy = kron2(Y, Y);
  const Eigen::Matrix4cd zz = kron2(Z, Z);
  Eigen::Matrix4d signs;
  for (int k = 0; k < 4; ++k) {
    const Eigen::Vector4cd v = mb.col(k);
    signs(k, 0) = (v.adjoint() * xx * v)(0, 0).real();
    signs(k, 1) = (v.adjoint() * yy * v)(0, 0).real();
    signs(k, 2) = (v.adjoint() * zz * v)(0, 0).real();
    signs(k, 3) = 1.0;
  }
  const Eigen::Vector4d abcg = signs.fullPivLu().solve(theta);

  Eigen::Matrix2cd a1, a2, b1, b2;
  factor_kron(mb * k1 * mb.adjoint(), a1, a2);
  factor_kron(mb * p.transpose().cast<cplx>() * mb.adjoint(), b1, b2);

  append_local(circuit, b1, first);
  append_local(circuit, b2, second);
  circuit.rxx(first, second, -abcg(0));
  circuit.rx(first, -kPi / 2).rx(second, -kPi / 2);
  circuit.rzz(first, second, -abcg(1));
  circuit.rx(first, kPi / 2).rx(second, kPi / 2);
  circuit.rzz(first, second, -abcg(2));
  append_local(circuit, a1, first);
  append_local(circuit, a2, second);
}

double spectral_norm(const CMat& m) {
  Eigen::JacobiSVD<CMat> svd(m);
  return svd.singularValues()(0);
}

double phase_insensitive_distance(const CMat& a, const CMat& b) {
  const cplx overlap = (b.adjoint() * a).trace();
  const cplx phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : cplx(1.0, 0.0);
  return spectral_norm(a - phase * b);
}

Eigen::Matrix2cd sqrt_unitary(const Eigen::Matrix2cd& u) {
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(u);
  Eigen::Matrix2cd d = Eigen::Matrix2cd::Zero();
  for (int k = 0; k < 2; ++k) d(k, k) = std::sqrt(es.eigenvalues()(k));
  return es.eigenvectors() * d * es.eigenvectors().inverse();
}

}  // namespace qemul
