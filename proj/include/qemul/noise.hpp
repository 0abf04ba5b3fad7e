#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "qemul/common.hpp"
#include "qemul/qasm.hpp"
#include "qemul/statevector.hpp"

namespace qemul {

/// Set of Kraus operators {K_a} with sum K_a^dag K_a = I.
struct KrausSet {
  std::string label;
  int dim = 2;
  /// Row-major dim x dim matrices.
  std::vector<std::vector<cplx>> operators;
  /// Branch probabilities when every K_a^dag K_a is proportional to I (unitary mixtures); empty otherwise.
  std::vector<double> fixed_weights;

  int n_qubits() const { return dim == 2 ? 1 : 2; }
  /// Fills fixed_weights if the set is a unitary mixture.
  void detect_fixed_weights();
  /// max-abs deviation of sum K^dag K from the identity.
  double completeness_error() const;
};

enum class ChannelType { Amplitude, Phase, T1T2, Depolarizing1, Depolarizing2, Pauli, ReadoutFlip };

struct ChannelSpec {
  ChannelType type = ChannelType::Depolarizing1;
  // amplitude: a | phase: b | t1t2: T1, T2, t | depolarizing*: p | pauli: px, py, pz | readout_flip: p
  std::vector<double> params;

  static ChannelSpec amplitude(double a) { return {ChannelType::Amplitude, {a}}; }
  static ChannelSpec phase(double b) { return {ChannelType::Phase, {b}}; }
  static ChannelSpec t1t2(double t1, double t2, double t) { return {ChannelType::T1T2, {t1, t2, t}}; }
  static ChannelSpec depolarizing1(double p) { return {ChannelType::Depolarizing1, {p}}; }
  static ChannelSpec depolarizing2(double p) { return {ChannelType::Depolarizing2, {p}}; }
  static ChannelSpec pauli(double px, double py, double pz) { return {ChannelType::Pauli, {px, py, pz}}; }
  static ChannelSpec readout_flip(double p) { return {ChannelType::ReadoutFlip, {p}}; }

  int n_qubits() const { return type == ChannelType::Depolarizing2 ? 2 : 1; }
};

/// Pure dephasing time T_phi = T1*T2 / (2*T1 - T2); infinite when T2 == 2*T1.
double dephasing_time(double t1, double t2);

KrausSet build_channel(const ChannelSpec& spec);

/// Samples one Kraus branch with probability <psi|K^dag K|psi> and renormalizes.
/// Returns the chosen branch index. targets[0] is the most significant local bit.
int apply_channel_stochastic(StateVector& state, const KrausSet& kraus, std::span<const int> targets, Rng& rng);

/// theta~ = theta + theta_c + theta_m + theta_nm.
struct AngleError {
  double theta_c = 0.0;
  double sigma_m = 0.0;
  double sigma_nm = 0.0;

  bool active() const { return theta_c != 0.0 || sigma_m != 0.0 || sigma_nm != 0.0; }
  bool operator==(const AngleError&) const = default;
};

struct GateNoise {
  std::vector<ChannelSpec> channels;
  AngleError theta;
  /// Only meaningful for the r gate's azimuth.
  AngleError phi;
  /// Fixed extra rotations appended on every target qubit, applied rx, ry, rz in order.
  double coherent_rx = 0.0;
  double coherent_ry = 0.0;
  double coherent_rz = 0.0;

  bool has_coherent() const { return coherent_rx != 0.0 || coherent_ry != 0.0 || coherent_rz != 0.0; }
};

struct QubitNoise {
  std::optional<double> t1;
  std::optional<double> t2;
  std::optional<double> prep;
  std::optional<double> readout;
};

struct NoiseModel {
  std::map<GateKind, GateNoise> gates;
  std::map<int, QubitNoise> qubits;
  /// Gate durations in microseconds, used with per-qubit T1/T2.
  std::map<GateKind, double> durations;
  double prep_flip = 0.0;
  double readout_flip = 0.0;

  /// Throws NoiseConfigError on out-of-range parameters.
  void validate() const;
  /// True when any element draws random numbers (channels, sigmas, SPAM, T1/T2 relaxation).
  bool is_stochastic() const;

  double prep_flip_for(int qubit) const;
  double readout_flip_for(int qubit) const;

  static NoiseModel from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

NoiseModel load_noise_model(const std::string& path);

/// Per-shot cache of non-Markovian angle offsets keyed by (kind, qubits, angle index).
class ShotContext {
 public:
  double non_markov_offset(GateKind kind, const std::vector<int>& qubits, int angle, double sigma, Rng& rng);
  void clear() { draws_.clear(); }
  std::size_t size() const { return draws_.size(); }

 private:
  std::map<std::tuple<GateKind, std::vector<int>, int>, double> draws_;
};

/// Returns a copy of `instr` with configured angle errors applied.
Instruction perturb_angles(const Instruction& instr, const NoiseModel& model, ShotContext& ctx, Rng& rng);

/// Noise model with all Kraus sets prebuilt; immutable and shareable across threads.
class CompiledNoise {
 public:
  explicit CompiledNoise(const NoiseModel& model);

  const NoiseModel& model() const { return model_; }

  /// Applies `instr` (unitary kind) with angle errors, coherent errors, channels and relaxation.
  void apply_gate(StateVector& state, const Instruction& instr, ShotContext& ctx, Rng& rng) const;
  /// State-preparation bit flips after initialization.
  void apply_prep(StateVector& state, Rng& rng) const;
  /// Classical readout flip of a measured bit.
  int apply_readout(int qubit, int bit, Rng& rng) const;

 private:
  NoiseModel model_;
  std::map<GateKind, std::vector<KrausSet>> gate_channels_;
  std::map<std::pair<GateKind, int>, KrausSet> relaxation_;
};

}  // namespace qemul
