#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qemul/linalg.hpp"
#include "qemul/qasm.hpp"

namespace qemul {

/// H = sum_i h_i P_i; Pauli strings list qubit n-1 first.
struct PauliHamiltonian {
  std::vector<std::pair<double, std::string>> terms;

  int n_qubits() const;
  void validate() const;
  /// Dense 2^n x 2^n matrix.
  CMat matrix() const;

  nlohmann::json to_json() const;
  static PauliHamiltonian from_json(const nlohmann::json& j);
};

/// True if the two strings commute qubit by qubit.
bool qubitwise_commute(const std::string& a, const std::string& b);

/// Greedy coloring of the qubit-wise non-commutation graph; families hold term indices.
std::vector<std::vector<int>> group_commuting(const PauliHamiltonian& h);

/// Appends exp(-i theta P) as basis change, CX ladder, RZ(2 theta), and the inverse.
void append_pauli_exponential(Circuit& c, const std::string& pauli, double theta);

/// Suzuki coefficient s_k = 1 / (4 - 4^{1/(2k-1)}).
double suzuki_coefficient(int k);

/// r steps of the order-`order` product formula (1, 2, 4, 6, ...); identity terms only add a global phase and are dropped.
Circuit trotter_circuit(const PauliHamiltonian& h, double t, int r, int order);

/// exp(-i t H) from the Hermitian eigendecomposition.
CMat exact_evolution(const PauliHamiltonian& h, double t);
/// Spectral-norm distance between the Trotter circuit and exact evolution (identity terms excluded).
double trotter_error(const PauliHamiltonian& h, double t, int r, int order);

}  // namespace qemul
