#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qemul/linalg.hpp"
#include "qemul/noise.hpp"
#include "qemul/qasm.hpp"

namespace qemul {

/// One preparation/setting pair with observed outcome counts.
/// Labels list qubit n-1 first: setting "XZ" measures qubit 1 in X and qubit 0 in Z.
struct TomoRecord {
  std::string prep;
  std::string setting;
  std::map<std::string, double> counts;
};

struct TomoDataset {
  std::vector<TomoRecord> records;

  /// Qubit count inferred from the first setting (or prep) label.
  int n_qubits() const;

  nlohmann::json to_json() const;
  static TomoDataset from_json(const nlohmann::json& j);
};

/// All 3^n Pauli settings over {X, Y, Z}.
std::vector<std::string> qst_design(int n);
/// All 4^n preparations over {0, 1, +, i}.
std::vector<std::string> prep_labels(int n);
/// 4^n preparations x 3^n settings.
std::vector<std::pair<std::string, std::string>> qpt_design(int n);

/// Pre-measurement rotations mapping each setting's eigenbasis to the computational basis.
Circuit setting_rotation(const std::string& setting);
/// Circuit preparing a product of {|0>, |1>, |+>, |+i>} from |0...0>.
Circuit prep_circuit(const std::string& prep);

CVec prep_vector(const std::string& prep);
CMat prep_state(const std::string& prep);
/// Projector onto outcome `bits` of `setting` (R^dag |b><b| R).
CMat setting_effect(const std::string& setting, const std::string& bits);

enum class TomoKind { State, Process, Detector };

struct MleConfig {
  /// Rank of the root c; 0 means full rank.
  int rank = 0;
  int max_iterations = 5000;
  double tolerance = 1e-10;
};

struct MleResult {
  TomoKind kind = TomoKind::State;
  int dim = 0;
  int rank = 0;
  /// Density matrix (state) or Choi matrix (process).
  CMat matrix;
  /// POVM effects (detector), keyed by outcome label in `outcomes`.
  std::vector<CMat> povm;
  std::vector<std::string> outcomes;
  std::vector<double> loglik_trace;
  int iterations = 0;
  bool converged = false;
  std::string message;

  double loglik() const { return loglik_trace.empty() ? 0.0 : loglik_trace.back(); }
  nlohmann::json to_json() const;
};

/// Least-squares linear inversion projected onto the feasible set; throws ValidationError if not informationally complete.
MleResult linear_inversion(const TomoDataset& data, TomoKind kind, int rank = 0);

/// Projected-gradient maximum likelihood over X = c c^dag.
MleResult reconstruct_mle(const TomoDataset& data, TomoKind kind, const MleConfig& cfg = {});

/// Log-likelihood sum k ln p of a candidate (state/Choi matrix or POVM).
double log_likelihood(const TomoDataset& data, TomoKind kind, const CMat& matrix, const std::vector<CMat>& povm = {},
                      const std::vector<std::string>& outcomes = {});

/// Partial trace over the output factor of a Choi matrix indexed (out * d + in).
CMat choi_partial_trace_output(const CMat& choi);
/// Choi matrix vec(U) vec(U)^dag.
CMat choi_of_unitary(const CMat& u);
/// Applies the channel represented by `choi` to rho.
CMat apply_choi(const CMat& choi, const CMat& rho);

struct QhtResult {
  CMat hamiltonian;
  CMat unitary;
  double top_eigenvalue = 0.0;
  /// Top eigenvalue below 0.8 d: channel too noisy for a rank-1 extraction.
  bool noisy = false;
  /// An eigenphase sits within 1e-6 of the branch cut at pi.
  bool branch_ambiguous = false;
};

QhtResult qht_extract(const CMat& choi, double tau);

double fidelity_to_target(const CMat& rho, const CVec& psi);
double entanglement_fidelity(const CMat& choi, const CMat& u);

/// Sampled datasets from the circuit simulator.
TomoDataset simulate_qst(const Circuit& prep, std::int64_t shots, const NoiseModel* noise, std::uint64_t seed);
TomoDataset simulate_qpt(const Circuit& process, std::int64_t shots, const NoiseModel* noise, std::uint64_t seed);
/// Detector = `pre` followed by a computational-basis measurement; probes are the 4^n preparations.
TomoDataset simulate_qdt(const Circuit& pre, std::int64_t shots, const NoiseModel* noise, std::uint64_t seed);

/// Expected (noise-free) counts shots * p for a known state / unitary process.
TomoDataset expected_qst(const CMat& rho, double shots);
TomoDataset expected_qpt(const CMat& choi, double shots);

nlohmann::json matrix_to_json(const CMat& m);
CMat matrix_from_json(const nlohmann::json& j);

}  // namespace qemul
