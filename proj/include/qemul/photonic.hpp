#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qemul/common.hpp"
#include "qemul/linalg.hpp"

namespace qemul {

/// Photon counts per mode.
using Occupation = std::vector<int>;

/// Sparse superposition over Fock basis states of a fixed number of modes.
class FockState {
 public:
  FockState() = default;
  FockState(int n_modes, int ceiling) : n_modes_(n_modes), ceiling_(ceiling) {}

  int n_modes() const { return n_modes_; }
  int ceiling() const { return ceiling_; }
  const std::map<Occupation, cplx>& amplitudes() const { return amps_; }
  std::map<Occupation, cplx>& amplitudes() { return amps_; }

  cplx amplitude(const Occupation& occ) const;
  double norm_squared() const;
  void normalize();
  /// Probability that `mode` holds exactly n photons.
  double mode_probability(int mode, int n) const;
  /// Drops entries with |amp|^2 below `eps`.
  void prune(double eps = 1e-28);

 private:
  int n_modes_ = 0;
  int ceiling_ = 0;
  std::map<Occupation, cplx> amps_;
};

FockState fock_init(const Occupation& occupations, int ceiling);

/// Phase shifter exp(i theta n_mode).
void apply_phase(FockState& state, int mode, double theta);

/// exp(theta (e^{i phi} a2^dag a1 - e^{-i phi} a1^dag a2)):
/// a1^dag -> cos(theta) a1^dag + e^{i phi} sin(theta) a2^dag,
/// a2^dag -> cos(theta) a2^dag - e^{-i phi} sin(theta) a1^dag.
void apply_beamsplitter(FockState& state, int m1, int m2, double theta, double phi);

/// Destructive photon-number measurement of `mode`: samples n, collapses, and empties the mode.
/// With probability dark_prob the reported count is n + 1.
int detect(FockState& state, int mode, double dark_prob, Rng& rng);

/// Loss to a virtual mode with probability r per photon, followed by detection of the virtual mode.
/// Returns the number of photons lost.
int apply_loss(FockState& state, int mode, double r, Rng& rng);

/// Ryser's formula with Gray-code subset enumeration, O(n 2^n).
cplx permanent(const CMat& a);

/// |Per(U_{out,in})|^2 / (prod in! prod out!).
double bs_probability(const CMat& u, const Occupation& input, const Occupation& output);

struct BsNoise {
  /// Per-output-mode loss probability; empty means lossless.
  std::vector<double> loss;
  /// Indistinguishability: each photon is distinguishable with probability 1 - eta.
  double eta = 1.0;
  double dark_prob = 0.0;
};

/// Maximum photon number accepted by bs_sample.
inline constexpr int kMaxBsPhotons = 20;

/// Clifford-Clifford sampling; sample i draws from derive_stream(seed, i).
std::vector<Occupation> bs_sample(const CMat& u, const Occupation& input, std::int64_t n_samples, const BsNoise& noise,
                                  std::uint64_t seed);

/// Digits per mode ("12001"); comma-separated when any count exceeds 9.
std::string occupation_string(const Occupation& occ);
Occupation parse_occupation(const std::string& text);

/// Throws ValidationError if u is not square or deviates from unitarity by more than tol (max-abs of U^dag U - I).
void check_unitary(const CMat& u, double tol);
/// {"unitary": [[{"re":..,"im":..},..],..]}; entries may also be plain numbers.
CMat interferometer_from_json(const nlohmann::json& j, double tol = 1e-8);
nlohmann::json interferometer_to_json(const CMat& u);
/// Symmetric m-mode discrete Fourier interferometer.
CMat fourier_interferometer(int m);

/// Post-selected two-qubit linear-optics CNOT on dual-rail qubits.
/// Modes: 0 = control|0>, 1 = control|1>, 2 = target|0>, 3 = target|1>, 4, 5 = vacuum ancillas.
struct KlmCnotResult {
  std::int64_t shots = 0;
  std::int64_t successes = 0;
  /// table[in][out]: post-selected counts with two-bit labels 2*control + target.
  std::array<std::array<std::int64_t, 4>, 4> table{};

  double success_rate() const { return shots ? static_cast<double>(successes) / static_cast<double>(shots) : 0.0; }
};

/// Output state of the gate before detection for computational input 2*control + target.
FockState klm_cnot_state(int input);
/// Detects all modes on `shots` copies; shot s uses input s % 4.
KlmCnotResult klm_cnot_demo(std::int64_t shots, std::uint64_t seed);

}  // namespace qemul
