#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qemul/common.hpp"

namespace qemul {

enum class GateKind { U, CX, R, RX, RY, RZ, RXX, RZZ, Measure, Barrier, Reset };

/// Lowercase QASM mnemonic ("u", "cx", "rxx", "measure", ...).
std::string_view kind_name(GateKind kind);
/// Inverse of kind_name; throws ValidationError on unknown names.
GateKind kind_from_name(std::string_view name);

/// Number of angle parameters carried by a kind.
int param_count(GateKind kind);
/// Qubit arity, or -1 for variadic (barrier).
int qubit_arity(GateKind kind);
bool is_unitary(GateKind kind);
/// Native trapped-ion rotations: r, rx, ry, rz, rxx, rzz.
bool is_native_rotation(GateKind kind);

struct Instruction {
  GateKind kind = GateKind::U;
  std::vector<int> qubits;
  std::vector<int> clbits;
  std::vector<double> params;

  bool operator==(const Instruction&) const = default;
};

/// Ordered gate list over a single quantum and a single classical register.
struct Circuit {
  int n_qubits = 0;
  int n_clbits = 0;
  std::vector<Instruction> instructions;

  Circuit() = default;
  Circuit(int qubits, int clbits) : n_qubits(qubits), n_clbits(clbits) {}

  bool operator==(const Circuit&) const = default;

  /// Throws ValidationError if any index or arity is inconsistent.
  void validate() const;

  Circuit& u(int q, double theta, double phi, double lambda);
  Circuit& cx(int control, int target);
  Circuit& r(int q, double theta, double phi);
  Circuit& rx(int q, double theta);
  Circuit& ry(int q, double theta);
  Circuit& rz(int q, double theta);
  Circuit& rxx(int q0, int q1, double theta);
  Circuit& rzz(int q0, int q1, double theta);
  Circuit& measure(int q, int c);
  Circuit& barrier(std::vector<int> qubits);
  Circuit& reset(int q);

  Circuit& h(int q) { return u(q, kPi / 2, 0.0, kPi); }
  Circuit& x(int q) { return u(q, kPi, 0.0, kPi); }
  /// Diagonal phase diag(1, e^{iλ}).
  Circuit& phase(int q, double lambda) { return u(q, 0.0, 0.0, lambda); }
  Circuit& measure_all();

  Circuit& append(const Instruction& instr);
  Circuit& append(const Circuit& other);
  /// Copy with all Measure/Barrier instructions removed.
  Circuit without_measurements() const;
};

Circuit parse_qasm(std::string_view text);
std::string emit_qasm(const Circuit& circuit);

}  // namespace qemul
