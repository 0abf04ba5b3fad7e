#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qemul/noise.hpp"
#include "qemul/qasm.hpp"

namespace qemul {

/// Classical fidelity (sum_m sqrt(p_m q_m))^2.
double fidelity(const std::vector<double>& p, const std::vector<double>& q);

/// (n_h - sqrt(n_h (n_s - n_h / n_c))) / (n_c n_s); `factor2` doubles the deviation term.
double h_est(double n_h, double n_c, double n_s, bool factor2 = false);

/// Indices whose probability is strictly above the median.
std::vector<std::size_t> heavy_set(const std::vector<double>& ideal);

// ---------------------------------------------------------------- quantum volume

struct QvRecord {
  int n = 0;
  int n_c = 0;
  int n_s = 0;
  std::int64_t n_h = 0;
  double h_est = 0.0;
  bool passed = false;
  /// n_h / (n_c n_s).
  double heavy_fraction = 0.0;
};

struct QvResult {
  std::vector<QvRecord> records;
  std::int64_t quantum_volume = 1;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// Square model circuit: n layers of a random permutation followed by Haar SU(4) blocks on consecutive pairs.
Circuit qv_circuit(int n, Rng& rng);

/// Runs widths 2..n_max. Circuit c of width n uses derive_stream(splitmix64(seed + n), c).
QvResult qv_experiment(int n_max, int n_c, int n_s, const NoiseModel* noise, std::uint64_t seed, bool factor2 = false);

// ---------------------------------------------------------------- randomized benchmarking

/// The 24 single-qubit Cliffords modulo phase; element 0 is the identity.
const std::vector<Eigen::Matrix2cd>& clifford_group();
/// Index of the group element equal to m up to phase; -1 if absent.
int clifford_index(const Eigen::Matrix2cd& m);

struct ExpFit {
  double a = 0.0;
  double b = 0.0;
  double gamma = 0.0;
  bool ok = false;
  std::string message;
};

/// Least-squares fit of y = A gamma^x + B (Levenberg-Marquardt from a log-linear start with B = 1/2).
ExpFit fit_exponential(const std::vector<double>& x, const std::vector<double>& y);

struct RbResult {
  std::vector<int> lengths;
  std::vector<double> survival;
  /// survival_per_sequence[l][s]
  std::vector<std::vector<double>> survival_per_sequence;
  ExpFit fit;
  double avg_gate_fidelity = 0.0;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// Random Clifford sequence of length L followed by its inverse, one U gate per element, measured into c[0].
Circuit rb_sequence(int length, Rng& rng);

RbResult rb_experiment(const std::vector<int>& lengths, int n_seq, std::int64_t shots, const NoiseModel& noise,
                       std::uint64_t seed);

}  // namespace qemul
