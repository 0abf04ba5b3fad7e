#include "qemul/qubo.hpp"

#include <cmath>
#include <limits>

#include "qemul/common.hpp"

namespace qemul {

double QuboProblem::coeff(int i, int j) const {
  auto it = s.find({std::min(i, j), std::max(i, j)});
  return it == s.end() ? 0.0 : it->second;
}

void QuboProblem::add(int i, int j, double v) {
  if (i < 0 || j < 0 || i >= n || j >= n) throw ValidationError("QUBO index out of range");
  s[{std::min(i, j), std::max(i, j)}] += v;
}

double QuboProblem::energy_spins(const std::vector<int>& z) const {
  if (static_cast<int>(z.size()) != n) throw ValidationError("spin vector length mismatch");
  double e = offset;
  for (const auto& [ij, v] : s) {
    const auto [i, j] = ij;
    e += i == j ? v * z[static_cast<std::size_t>(i)] : v * z[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(j)];
  }
  return e;
}

double QuboProblem::energy_bits(std::uint64_t bits) const {
  double e = offset;
  for (const auto& [ij, v] : s) {
    const auto [i, j] = ij;
    const int zi = ((bits >> i) & 1) ? -1 : 1;
    const int zj = ((bits >> j) & 1) ? -1 : 1;
    e += i == j ? v * zi : v * zi * zj;
  }
  return e;
}

Eigen::VectorXd QuboProblem::decode_bits(std::uint64_t bits) const {
  if (!decode) throw ValidationError("QUBO has no decode map");
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) q(i) = static_cast<double>((bits >> i) & 1);
  return decode->c * q + decode->x0;
}

nlohmann::json QuboProblem::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [ij, v] : s) terms.push_back({ij.first, ij.second, v});
  nlohmann::json j = {{"n", n}, {"terms", terms}};
  if (offset != 0.0) j["offset"] = offset;
  if (decode) {
    nlohmann::json c = nlohmann::json::array();
    for (Eigen::Index r = 0; r < decode->c.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < decode->c.cols(); ++k) row.push_back(decode->c(r, k));
      c.push_back(row);
    }
    j["decode"] = {{"c", c}, {"x0", std::vector<double>(decode->x0.data(), decode->x0.data() + decode->x0.size())}};
  }
  return j;
}

QuboProblem QuboProblem::from_json(const nlohmann::json& j) {
  QuboProblem q;
  try {
    q.n = j.at("n").get<int>();
    if (q.n < 1) throw ValidationError("QUBO needs at least one variable");
    for (const auto& t : j.at("terms")) {
      if (!t.is_array() || t.size() != 3) throw ValidationError("QUBO terms are [i, j, s_ij] triples");
      q.add(t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<double>());
    }
    q.offset = j.value("offset", 0.0);
    if (j.contains("decode")) {
      const auto& c = j.at("decode").at("c");
      const auto& x0 = j.at("decode").at("x0");
      QuboDecode d;
      d.c.resize(static_cast<Eigen::Index>(c.size()), q.n);
      d.x0.resize(static_cast<Eigen::Index>(x0.size()));
      if (x0.size() != c.size()) throw ValidationError("decode c and x0 sizes differ");
      for (std::size_t r = 0; r < c.size(); ++r) {
        if (c.at(r).size() != static_cast<std::size_t>(q.n)) throw ValidationError("decode row length must equal n");
        for (int k = 0; k < q.n; ++k) d.c(static_cast<Eigen::Index>(r), k) = c.at(r).at(static_cast<std::size_t>(k)).get<double>();
        d.x0(static_cast<Eigen::Index>(r)) = x0.at(r).get<double>();
      }
      q.decode = std::move(d);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed QUBO JSON: ") + e.what());
  }
  return q;
}

QuboProblem qubo_from_quadratic(const Eigen::MatrixXd& q_in, const Eigen::VectorXd& c, double k, const QuboDecode& decode) {
  const Eigen::MatrixXd q = 0.5 * (q_in + q_in.transpose());
  const Eigen::MatrixXd& cm = decode.c;
  if (q.rows() != cm.rows() || c.size() != cm.rows() || decode.x0.size() != cm.rows()) {
    throw ValidationError("quadratic form and decode map dimensions differ");
  }
  const Eigen::MatrixXd qb = cm.transpose() * q * cm;
  const Eigen::VectorXd lin = 2.0 * cm.transpose() * q * decode.x0 + cm.transpose() * c;
  const double c0 = decode.x0.dot(q * decode.x0) + c.dot(decode.x0) + k;

  QuboProblem out;
  out.n = static_cast<int>(cm.cols());
  out.offset = c0;
  for (int i = 0; i < out.n; ++i) {
    const double h = qb(i, i) + lin(i);
    out.offset += h / 2.0;
    if (h != 0.0) out.add(i, i, -h / 2.0);
    for (int j = i + 1; j < out.n; ++j) {
      const double jij = 2.0 * qb(i, j);
      if (jij == 0.0) continue;
      out.add(i, j, jij / 4.0);
      out.add(i, i, -jij / 4.0);
      out.add(j, j, -jij / 4.0);
      out.offset += jij / 4.0;
    }
  }
  out.decode = decode;
  return out;
}

QuboDecode fixed_point_decode(int n_vars, int k, double scale, const Eigen::VectorXd& center) {
  if (k < 2) throw ValidationError("fixed-point encoding needs k >= 2 bits");
  if (center.size() != 0 && center.size() != n_vars) throw ValidationError("center length must equal the variable count");
  QuboDecode d;
  d.c = Eigen::MatrixXd::Zero(n_vars, n_vars * k);
  d.x0 = center.size() ? center : Eigen::VectorXd::Zero(n_vars);
  for (int i = 0; i < n_vars; ++i) {
    d.c(i, i * k) = -scale;
    for (int j = 1; j < k; ++j) d.c(i, i * k + j) = scale * std::ldexp(1.0, -j);
  }
  return d;
}

QuboProblem qubo_from_linear_system(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int k) {
  if (a.rows() != a.cols()) throw ValidationError("linear-system matrix must be square");
  if (b.size() != a.rows()) throw ValidationError("right-hand side length mismatch");
  const auto n = static_cast<int>(a.rows());
  return qubo_from_quadratic(a.transpose() * a, -2.0 * a.transpose() * b, 0.0, fixed_point_decode(n, k, 1.0, {}));
}

double linear_system_residual_bound(const Eigen::MatrixXd& a, int k) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0) * std::sqrt(static_cast<double>(a.rows())) * std::ldexp(1.0, 1 - k);
}

namespace {

void check_ode(const OdeProblem& ode) {
  if (ode.n_t < 4) throw ValidationError("ODE grid needs n_t >= 4");
  const auto nt = static_cast<std::size_t>(ode.n_t);
  if (ode.f2.size() != nt || ode.f1.size() != nt || ode.f0.size() != nt || ode.g.size() != nt) {
    throw ValidationError("coefficient samples must have n_t entries");
  }
  for (double v : ode.f2) {
    if (v == 0.0) throw ValidationError("f2 vanishes on the grid");
  }
  if (!(ode.x_hi > ode.x_lo)) throw ValidationError("empty ODE domain");
}

// Residual at interior point m (1..n_t-2) as a^T y + d over interior unknowns.
void residual_row(const OdeProblem& ode, int m, Eigen::VectorXd& a, double& d) {
  const double h = ode.h();
  const auto i = static_cast<std::size_t>(m);
  const double lo = ode.f2[i] / (h * h) - ode.f1[i] / (2 * h);
  const double mid = -2.0 * ode.f2[i] / (h * h) + ode.f0[i];
  const double hi = ode.f2[i] / (h * h) + ode.f1[i] / (2 * h);
  const int n = ode.n_t - 2;
  a = Eigen::VectorXd::Zero(n);
  d = -ode.g[i];
  a(m - 1) = mid;
  if (m - 2 >= 0) {
    a(m - 2) = lo;
  } else {
    d += lo * ode.y0;
  }
  if (m <= n - 1) {
    a(m) = hi;
  } else {
    d += hi * ode.y1;
  }
}

}  // namespace

double OdeProblem::functional(const Eigen::VectorXd& interior) const {
  check_ode(*this);
  double f = 0.0;
  Eigen::VectorXd a;
  double d = 0.0;
  for (int m = 1; m <= n_t - 2; ++m) {
    residual_row(*this, m, a, d);
    const double r = a.dot(interior) + d;
    f += r * r;
  }
  return f;
}

Eigen::VectorXd OdeProblem::solve_discrete() const {
  check_ode(*this);
  const int n = n_t - 2;
  Eigen::MatrixXd m(n, n);
  Eigen::VectorXd rhs(n);
  Eigen::VectorXd a;
  double d = 0.0;
  for (int k = 1; k <= n; ++k) {
    residual_row(*this, k, a, d);
    m.row(k - 1) = a.transpose();
    rhs(k - 1) = -d;
  }
  return m.fullPivLu().solve(rhs);
}

QuboProblem qubo_from_ode(const OdeProblem& ode, int k, double scale, const Eigen::VectorXd& center) {
  check_ode(ode);
  if (!(scale > 0.0)) throw ValidationError("encoding scale must be positive");
  const int n = ode.n_t - 2;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  double k0 = 0.0;
  Eigen::VectorXd a;
  double d = 0.0;
  for (int m = 1; m <= n; ++m) {
    residual_row(ode, m, a, d);
    q += a * a.transpose();
    c += 2.0 * d * a;
    k0 += d * d;
  }
  return qubo_from_quadratic(q, c, k0, fixed_point_decode(n, k, scale, center));
}

QuboProblem refine(const OdeProblem& ode, int k, const Eigen::VectorXd& prev, double scale) {
  return qubo_from_ode(ode, k, scale / 2.0, prev);
}

std::vector<std::uint64_t> brute_force_optima(const QuboProblem& q, double tol) {
  if (q.n < 1 || q.n > 30) throw CapacityError("exhaustive search limited to 1..30 variables");
  const int n = q.n;
  // Dense copies for a tight inner loop.
  std::vector<double> lin(static_cast<std::size_t>(n), 0.0);
  std::vector<std::pair<std::pair<int, int>, double>> quad;
  for (const auto& [ij, v] : q.s) {
    if (ij.first == ij.second) {
      lin[static_cast<std::size_t>(ij.first)] += v;
    } else {
      quad.push_back({ij, v});
    }
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint64_t> optima;
  const std::uint64_t limit = std::uint64_t{1} << n;
  for (std::uint64_t bits = 0; bits < limit; ++bits) {
    double e = q.offset;
    for (int i = 0; i < n; ++i) e += ((bits >> i) & 1) ? -lin[static_cast<std::size_t>(i)] : lin[static_cast<std::size_t>(i)];
    for (const auto& [ij, v] : quad) e += (((bits >> ij.first) ^ (bits >> ij.second)) & 1) ? -v : v;
    if (e < best - tol) {
      best = e;
      optima.assign(1, bits);
    } else if (e <= best + tol) {
      optima.push_back(bits);
    }
  }
  return optima;
}

std::uint64_t brute_force_minimum(const QuboProblem& q) {
  const auto optima = brute_force_optima(q, 0.0);
  std::uint64_t best = optima.front();
  double be = q.energy_bits(best);
  for (auto b : optima) {
    const double e = q.energy_bits(b);
    if (e < be) {
      be = e;
      best = b;
    }
  }
  return best;
}

}  // namespace qemul
