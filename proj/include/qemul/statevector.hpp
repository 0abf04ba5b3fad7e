#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "qemul/common.hpp"
#include "qemul/qasm.hpp"

namespace qemul {

/// Row-major 2x2 matrix.
using Mat2 = std::array<cplx, 4>;
/// Row-major 4x4 matrix; local basis index is 2*bit(first) + bit(second).
using Mat4 = std::array<cplx, 16>;

/// Default memory guard for state vectors (2^26 amplitudes = 1 GiB).
inline constexpr int kDefaultQubitCap = 26;

int qubit_cap();
void set_qubit_cap(int cap);

/// Dense state over n qubits. Qubit k addresses bit k of the basis index.
class StateVector {
 public:
  StateVector() = default;
  /// |0...0> on n qubits; throws CapacityError above qubit_cap().
  explicit StateVector(int n_qubits);

  int n_qubits() const noexcept { return n_; }
  std::size_t dim() const noexcept { return amps_.size(); }
  std::span<const cplx> amplitudes() const noexcept { return amps_; }
  std::span<cplx> amplitudes() noexcept { return amps_; }
  cplx operator[](std::size_t i) const { return amps_[i]; }
  cplx& operator[](std::size_t i) { return amps_[i]; }

  double norm_squared() const;
  void normalize();

  void apply_1q(const Mat2& m, int q);
  void apply_2q(const Mat4& m, int first, int second);
  void apply_cx(int control, int target);
  void apply_x(int q);

  /// Applies an arbitrary k-qubit operator (dimension 2^k, row-major) in place.
  /// targets[0] is the most significant bit of the local index.
  void apply_matrix(std::span<const cplx> m, std::span<const int> targets);

  /// Probability of reading 0 on qubit q.
  double prob_zero(int q) const;
  /// Projects qubit q onto |bit> and renormalizes by sqrt(p).
  void collapse(int q, int bit, double p);

  std::vector<double> probabilities() const;

 private:
  int n_ = 0;
  std::vector<cplx> amps_;
};

StateVector init_state(int n_qubits);

Mat2 u_matrix(double theta, double phi, double lambda);
Mat2 rx_matrix(double theta);
Mat2 ry_matrix(double theta);
Mat2 rz_matrix(double theta);
Mat2 r_matrix(double theta, double phi);
Mat4 rxx_matrix(double theta);
Mat4 rzz_matrix(double theta);
Mat4 cx_matrix();

/// Applies a unitary instruction; throws ValidationError for measure/reset.
void apply_instruction(StateVector& state, const Instruction& instr);

/// Born-rule measurement of qubit q with collapse. Returns the bit.
int measure_qubit(StateVector& state, int q, Rng& rng);

/// <psi|P|psi> for a Pauli string; rightmost character acts on qubit 0.
double expectation_pauli(const StateVector& state, std::string_view pauli);

}  // namespace qemul
