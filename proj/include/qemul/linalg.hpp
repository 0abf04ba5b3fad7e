#pragma once

#include <Eigen/Dense>

#include "qemul/common.hpp"
#include "qemul/qasm.hpp"
#include "qemul/statevector.hpp"

namespace qemul {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Dense 2^n x 2^n unitary of a single instruction acting on n qubits (little-endian).
CMat instruction_unitary(const Instruction& instr, int n_qubits);
/// Dense unitary of the measurement-free part of a circuit (resets rejected).
CMat circuit_unitary(const Circuit& circuit);

Eigen::Matrix2cd to_eigen(const Mat2& m);
Eigen::Matrix4cd to_eigen(const Mat4& m);

/// V = e^{i alpha} U(theta, phi, lambda).
struct ZyzAngles {
  double theta = 0.0;
  double phi = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
};
/// Decomposes a 2x2 unitary (any global phase) into U-gate angles.
ZyzAngles zyz_decompose(const Eigen::Matrix2cd& v);

/// Haar-distributed d x d unitary (QR of a complex Ginibre matrix with phase correction).
CMat haar_unitary(int d, Rng& rng);
/// Haar-distributed SU(4) element.
Eigen::Matrix4cd haar_su4(Rng& rng);

/// Appends U/RXX/RZZ/RX gates realizing the two-qubit unitary `u` (up to global phase)
/// on (first, second); local index of `u` is 2*bit(first) + bit(second).
void append_two_qubit_unitary(Circuit& circuit, const Eigen::Matrix4cd& u, int first, int second);

/// Largest singular value.
double spectral_norm(const CMat& m);
/// min over global phase of the spectral-norm distance ||a - e^{i phi} b||, estimated via tr(b^dag a).
double phase_insensitive_distance(const CMat& a, const CMat& b);

/// Principal square root of a 2x2 unitary.
Eigen::Matrix2cd sqrt_unitary(const Eigen::Matrix2cd& u);

}  // namespace qemul
