#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qemul/noise.hpp"
#include "qemul/qasm.hpp"
#include "qemul/statevector.hpp"

namespace qemul {

/// Outcome bitstring -> count. Bitstrings list clbit n-1 first.
struct CountsHistogram {
  std::map<std::string, std::int64_t> counts;
  std::int64_t shots = 0;
  std::uint64_t seed = 0;

  double frequency(const std::string& outcome) const;
  bool operator==(const CountsHistogram&) const = default;

  nlohmann::json to_json() const;
  static CountsHistogram from_json(const nlohmann::json& j);
};

/// Exact outcome probabilities over 2^n basis states, little-endian indexing.
struct Distribution {
  std::vector<double> probabilities;

  std::size_t size() const { return probabilities.size(); }
  double operator[](std::size_t i) const { return probabilities[i]; }
};

/// Renders the low `width` bits of `value`, most significant first.
std::string to_bitstring(std::uint64_t value, int width);

/// Final state of the unitary part of `circuit` (measurements and barriers skipped, resets rejected).
StateVector final_state(const Circuit& circuit);

/// Executes one trajectory and returns the classical register.
std::string run_shot(const Circuit& circuit, const CompiledNoise* noise, Rng& rng);

/// Aggregates `shots` trajectories; shot i draws from derive_stream(seed, i).
/// Circuits without stochastic noise whose measurements are terminal are sampled
/// from the exact final distribution instead.
CountsHistogram sample(const Circuit& circuit, std::int64_t shots, const NoiseModel* noise, std::uint64_t seed);

/// Exact |amplitude|^2 of the measurement-free circuit.
Distribution probabilities(const Circuit& circuit);

/// True if no gate or reset touches a qubit after it has been measured.
bool has_terminal_measurements(const Circuit& circuit);

}  // namespace qemul
