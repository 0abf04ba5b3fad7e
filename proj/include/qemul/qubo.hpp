#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace qemul {

/// Affine decode x = C q + x0 from bits q in {0,1} to the original variables.
struct QuboDecode {
  Eigen::MatrixXd c;
  Eigen::VectorXd x0;
};

/// f(z) = sum_{i<j} s_ij z_i z_j + sum_i s_ii z_i + offset, spins z in {+1,-1}; z = 1 - 2q.
struct QuboProblem {
  int n = 0;
  /// Upper-triangular storage, key (i, j) with i <= j.
  std::map<std::pair<int, int>, double> s;
  double offset = 0.0;
  std::optional<QuboDecode> decode;

  double coeff(int i, int j) const;
  /// Adds to s_ij (symmetric access).
  void add(int i, int j, double v);

  /// Spin objective, including the offset.
  double energy_spins(const std::vector<int>& z) const;
  /// Objective at a bit assignment; bit i of `bits` is q_i.
  double energy_bits(std::uint64_t bits) const;
  /// Decoded variables for a bit assignment.
  Eigen::VectorXd decode_bits(std::uint64_t bits) const;

  nlohmann::json to_json() const;
  static QuboProblem from_json(const nlohmann::json& j);
};

/// Builds the QUBO for min x^T Q x + c^T x + k over x = C q + x0.
QuboProblem qubo_from_quadratic(const Eigen::MatrixXd& q, const Eigen::VectorXd& c, double k, const QuboDecode& decode);

/// Fixed-point decode: x_i = center_i + scale * (-q_{i,0} + sum_{j>=1} 2^-j q_{i,j}); bit (i, j) has index i*k + j.
QuboDecode fixed_point_decode(int n_vars, int k, double scale, const Eigen::VectorXd& center);

/// Encodes x^T (A^T A) x - 2 x^T A^T b with k bits per variable on [-1, 1).
QuboProblem qubo_from_linear_system(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int k);
/// t sqrt(n) 2^{1-k} with t the spectral norm of A.
double linear_system_residual_bound(const Eigen::MatrixXd& a, int k);

/// f2 y'' + f1 y' + f0 y = g on a uniform grid over [x_lo, x_hi] with Dirichlet boundaries.
struct OdeProblem {
  std::vector<double> f2, f1, f0, g;  // sampled at all n_t grid points
  int n_t = 0;
  double y0 = 0.0;
  double y1 = 0.0;
  double x_lo = 0.0;
  double x_hi = 1.0;

  double h() const { return (x_hi - x_lo) / (n_t - 1); }
  /// Sum of squared central-difference residuals over interior points.
  double functional(const Eigen::VectorXd& interior) const;
  /// Solves the discretized linear system exactly.
  Eigen::VectorXd solve_discrete() const;
};

/// (n_t - 2) * k bit QUBO; window center defaults to zero.
QuboProblem qubo_from_ode(const OdeProblem& ode, int k, double scale = 1.0, const Eigen::VectorXd& center = {});
/// Re-centers the window on `prev` with half the scale.
QuboProblem refine(const OdeProblem& ode, int k, const Eigen::VectorXd& prev, double scale);

/// Exhaustive minimum over all 2^n bit assignments (n <= 30). Returns the lowest-energy assignment.
std::uint64_t brute_force_minimum(const QuboProblem& q);
/// All minimizing bit assignments within `tol`.
std::vector<std::uint64_t> brute_force_optima(const QuboProblem& q, double tol = 1e-9);

}  // namespace qemul
