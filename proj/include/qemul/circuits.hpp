#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qemul/linalg.hpp"
#include "qemul/qasm.hpp"
#include "qemul/qubo.hpp"

namespace qemul {

/// Secret s lists bit n-1 first; qubit k queries s[n-1-k]; ancilla is qubit n.
Circuit bernstein_vazirani(const std::string& secret);

/// Appends a k-controlled 2x2 unitary without ancillas (recursive square-root construction).
void append_multi_controlled(Circuit& c, const std::vector<int>& controls, int target, const Eigen::Matrix2cd& u);

Circuit grover(int n, std::uint64_t marked, int iterations);
/// sin^2((2k+1) arcsin(2^{-n/2})).
double grover_success_probability(int n, int iterations);

Circuit ghz(int n);

/// Ancilla qubit 0, registers A = 1..m and B = m+1..2m. Optional per-qubit RY angles prepare A and B.
Circuit swap_test(int m, const std::vector<double>& prep_a = {}, const std::vector<double>& prep_b = {});

struct FixedAngles {
  std::vector<double> betas;
  std::vector<double> gammas;

  int p() const { return static_cast<int>(betas.size()); }
};

Circuit qaoa_circuit(const QuboProblem& q, const FixedAngles& angles);
/// <H_targ> without the constant offset.
double qaoa_energy(const QuboProblem& q, const FixedAngles& angles);
/// Probability mass on the optimal assignments.
double qaoa_success_probability(const QuboProblem& q, const FixedAngles& angles);

struct TrainConfig {
  int restarts = 8;
  int max_iterations = 200;
  double initial_step = 0.4;
  double min_step = 1e-4;
};

struct TrainResult {
  FixedAngles angles;
  double min_success = 0.0;
  std::vector<double> per_instance;
};

/// Maximizes min_i P_success over the box beta in [0, pi), gamma in [0, 2 pi) per layer.
TrainResult train_fixed_angles(const std::vector<QuboProblem>& instances, int p, const TrainConfig& cfg,
                               std::uint64_t seed);

/// Max-Cut as an antiferromagnetic Ising QUBO: s_ij = w_ij per edge.
QuboProblem maxcut_qubo(int n, const std::vector<std::pair<int, int>>& edges);
/// Erdos-Renyi graph G(n, 1/2), redrawn until it has at least one edge.
QuboProblem random_maxcut(int n, Rng& rng);

}  // namespace qemul
