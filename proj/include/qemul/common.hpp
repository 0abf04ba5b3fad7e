#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace qemul {

using cplx = std::complex<double>;
using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// QASM syntax or semantic error, carrying a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Invalid argument or violated precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Requested state does not fit under the configured memory guard.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Noise configuration rejected by schema or physical constraints.
class NoiseConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical invariant failed at runtime (e.g. probabilities outside [0,1]).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent random stream for item `index` of a job seeded with `seed`.
/// Streams depend only on (seed, index), never on scheduling.
inline Rng derive_stream(std::uint64_t seed, std::uint64_t index) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace qemul
