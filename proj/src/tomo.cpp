#include "qemul/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "qemul/parallel.hpp"
#include "qemul/simulator.hpp"

namespace qemul {

namespace {

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMat hermitize(const CMat& m) { return 0.5 * (m + m.adjoint()); }

std::vector<std::string> all_bitstrings(int n) {
  std::vector<std::string> out;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << n); ++v) out.push_back(to_bitstring(v, n));
  return out;
}

std::vector<std::string> product_labels(const std::string& alphabet, int n) {
  std::vector<std::string> out = {""};
  for (int q = 0; q < n; ++q) {
    std::vector<std::string> next;
    for (const auto& s : out)
      for (char c : alphabet) next.push_back(s + c);
    out = std::move(next);
  }
  return out;
}

Eigen::Matrix2cd rotation_for(char basis) {
  switch (basis) {
    case 'X':
      return to_eigen(u_matrix(kPi / 2, 0.0, kPi));
    case 'Y':
      return to_eigen(u_matrix(kPi / 2, 0.0, kPi / 2));
    case 'Z':
      return Eigen::Matrix2cd::Identity();
    default:
      throw ValidationError(std::string("unknown measurement basis '") + basis + "'");
  }
}

// Hermitian square root of the inverse of a positive matrix.
CMat inverse_sqrt(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(m));
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = 1.0 / std::sqrt(std::max(ev(i), 1e-15));
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

// Keeps the `rank` largest eigenvalues, clipped at zero.
CMat psd_clip(const CMat& m, int rank) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(m));
  Eigen::VectorXd ev = es.eigenvalues();
  const Eigen::Index n = ev.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i < n - rank || ev(i) < 0.0) ev(i) = 0.0;
  }
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

// Root c with c c^dag = x, width `rank`.
CMat root_of(const CMat& x, int rank) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(x));
  const Eigen::Index n = x.rows();
  CMat c(n, rank);
  for (int k = 0; k < rank; ++k) {
    const Eigen::Index idx = n - 1 - k;
    c.col(k) = es.eigenvectors().col(idx) * std::sqrt(std::max(es.eigenvalues()(idx), 0.0));
  }
  return c;
}

struct Observation {
  int block = 0;
  int group = 0;
  CMat m;
  double k = 0.0;
};

struct Problem {
  TomoKind kind = TomoKind::State;
  int d = 0;          // Hilbert dimension
  int block_dim = 0;  // d (state, detector) or d^2 (process)
  int n_blocks = 1;
  std::vector<std::string> outcomes;
  std::vector<Observation> obs;
  std::vector<double> group_totals;
  double total = 0.0;
};

void check_counts(const TomoRecord& r, const std::set<std::string>& allowed) {
  for (const auto& [label, k] : r.counts) {
    if (!(k >= 0.0)) throw ValidationError("counts must be non-negative");
    if (!allowed.empty() && !allowed.count(label)) throw ValidationError("unexpected outcome label '" + label + "'");
  }
}

Problem build_problem(const TomoDataset& data, TomoKind kind) {
  if (data.records.empty()) throw ValidationError("tomography dataset is empty");
  Problem pb;
  pb.kind = kind;
  const int n = data.n_qubits();
  pb.d = 1 << n;
  pb.block_dim = kind == TomoKind::Process ? pb.d * pb.d : pb.d;

  if (kind == TomoKind::Detector) {
    std::set<std::string> labels;
    for (const auto& r : data.records)
      for (const auto& [label, k] : r.counts) labels.insert(label);
    const bool bitstrings = std::all_of(labels.begin(), labels.end(), [n](const std::string& s) {
      return static_cast<int>(s.size()) == n && s.find_first_not_of("01") == std::string::npos;
    });
    if (bitstrings) {
      pb.outcomes = all_bitstrings(n);
    } else {
      pb.outcomes.assign(labels.begin(), labels.end());
    }
    pb.n_blocks = static_cast<int>(pb.outcomes.size());
  } else {
    pb.outcomes = all_bitstrings(n);
  }
  const std::set<std::string> allowed(pb.outcomes.begin(), pb.outcomes.end());

  int group = 0;
  for (const auto& r : data.records) {
    check_counts(r, allowed);
    double tot = 0.0;
    for (const auto& [label, k] : r.counts) tot += k;
    pb.group_totals.push_back(tot);
    pb.total += tot;
    auto count_of = [&r](const std::string& o) {
      auto it = r.counts.find(o);
      return it == r.counts.end() ? 0.0 : it->second;
    };
    switch (kind) {
      case TomoKind::State:
        for (const auto& o : pb.outcomes) pb.obs.push_back({0, group, setting_effect(r.setting, o), count_of(o)});
        break;
      case TomoKind::Process: {
        const CMat rho_t = prep_state(r.prep).transpose();
        for (const auto& o : pb.outcomes) pb.obs.push_back({0, group, kron(setting_effect(r.setting, o), rho_t), count_of(o)});
        break;
      }
      case TomoKind::Detector: {
        const CMat rho = prep_state(r.prep);
        for (int b = 0; b < pb.n_blocks; ++b) pb.obs.push_back({b, group, rho, count_of(pb.outcomes[static_cast<std::size_t>(b)])});
        break;
      }
    }
    ++group;
  }
  if (!(pb.total > 0.0)) throw ValidationError("tomography dataset has no counts");
  return pb;
}

double model_probability(const Observation& o, const std::vector<CMat>& x) {
  return (o.m.cwiseProduct(x[static_cast<std::size_t>(o.block)].transpose())).sum().real();
}

double loglik_of(const Problem& pb, const std::vector<CMat>& x) {
  double l = 0.0;
  for (const auto& o : pb.obs) {
    if (o.k == 0.0) continue;
    l += o.k * std::log(std::max(model_probability(o, x), 1e-12));
  }
  return l;
}

std::vector<CMat> project(const Problem& pb, std::vector<CMat> x, int rank) {
  switch (pb.kind) {
    case TomoKind::State: {
      CMat rho = psd_clip(x[0], rank);
      const double tr = rho.trace().real();
      x[0] = tr > 1e-300 ? CMat(rho / tr) : CMat(CMat::Identity(pb.d, pb.d) / pb.d);
      return x;
    }
    case TomoKind::Process: {
      const int d = pb.d;
      const CMat id = CMat::Identity(d, d);
      CMat chi = x[0];
      for (int it = 0; it < 200; ++it) {
        const CMat delta = choi_partial_trace_output(chi) - id;
        chi = psd_clip(chi - kron(id, delta / d), rank);
        if ((choi_partial_trace_output(chi) - id).cwiseAbs().maxCoeff() < 1e-12) break;
      }
      // Congruence on the input factor makes Tr_A exact while keeping positivity and rank.
      const CMat s = kron(id, inverse_sqrt(choi_partial_trace_output(chi)));
      x[0] = hermitize(s * chi * s);
      return x;
    }
    case TomoKind::Detector: {
      const int d = pb.d;
      const CMat id = CMat::Identity(d, d);
      const double k = static_cast<double>(x.size());
      for (int it = 0; it < 200; ++it) {
        CMat sum = CMat::Zero(d, d);
        for (auto& e : x) {
          e = psd_clip(e, rank);
          sum += e;
        }
        if ((sum - id).cwiseAbs().maxCoeff() < 1e-12) break;
        for (auto& e : x) e -= (sum - id) / k;
      }
      CMat sum = CMat::Zero(d, d);
      for (auto& e : x) {
        e = psd_clip(e, rank);
        sum += e;
      }
      const CMat s = inverse_sqrt(sum);
      for (auto& e : x) e = hermitize(s * e * s);
      return x;
    }
  }
  return x;
}

int effective_rank(const Problem& pb, int rank) {
  if (rank == 0) return pb.block_dim;
  if (rank < 0 || rank > pb.block_dim) {
    throw ValidationError("rank must lie in [1, " + std::to_string(pb.block_dim) + "]");
  }
  return rank;
}

std::vector<CMat> solve_linear(const Problem& pb) {
  const int bd = pb.block_dim;
  const int per_block = bd * bd;
  const int cols = per_block * pb.n_blocks;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pb.obs.size()), cols);
  Eigen::VectorXd f(static_cast<Eigen::Index>(pb.obs.size()));
  const double rt2 = std::sqrt(2.0);
  for (std::size_t i = 0; i < pb.obs.size(); ++i) {
    const auto& o = pb.obs[i];
    const int off = o.block * per_block;
    int col = 0;
    const auto row = static_cast<Eigen::Index>(i);
    for (int k = 0; k < bd; ++k) a(row, off + col++) = o.m(k, k).real();
    for (int k = 0; k < bd; ++k)
      for (int l = k + 1; l < bd; ++l) {
        a(row, off + col++) = rt2 * o.m(k, l).real();
        a(row, off + col++) = rt2 * o.m(k, l).imag();
      }
    const double tot = pb.group_totals[static_cast<std::size_t>(o.group)];
    f(row) = tot > 0 ? o.k / tot : 0.0;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) {
    throw ValidationError("measurement design is not informationally complete (rank " + std::to_string(qr.rank()) +
                          " < " + std::to_string(cols) + ")");
  }
  const Eigen::VectorXd theta = qr.solve(f);
  std::vector<CMat> x(static_cast<std::size_t>(pb.n_blocks), CMat::Zero(bd, bd));
  for (int b = 0; b < pb.n_blocks; ++b) {
    CMat& m = x[static_cast<std::size_t>(b)];
    int col = b * per_block;
    for (int k = 0; k < bd; ++k) m(k, k) = theta(col++);
    for (int k = 0; k < bd; ++k)
      for (int l = k + 1; l < bd; ++l) {
        const double s = theta(col++) / rt2;
        const double t = theta(col++) / rt2;
        m(k, l) += cplx(s, t);
        m(l, k) += cplx(s, -t);
      }
  }
  return x;
}

MleResult package(const Problem& pb, const std::vector<CMat>& x, int rank) {
  MleResult r;
  r.kind = pb.kind;
  r.dim = pb.d;
  r.rank = rank;
  if (pb.kind == TomoKind::Detector) {
    r.povm = x;
    r.outcomes = pb.outcomes;
  } else {
    r.matrix = x[0];
  }
  return r;
}

}  // namespace

int TomoDataset::n_qubits() const {
  if (records.empty()) throw ValidationError("tomography dataset is empty");
  const auto& r = records.front();
  const int n = static_cast<int>(!r.setting.empty() ? r.setting.size() : r.prep.size());
  if (n < 1) throw ValidationError("tomography records need a setting or preparation label");
  return n;
}

nlohmann::json TomoDataset::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [k, v] : r.counts) {
      if (v == std::floor(v) && std::abs(v) < 9e15) {
        counts[k] = static_cast<std::int64_t>(v);
      } else {
        counts[k] = v;
      }
    }
    nlohmann::json e = {{"setting", r.setting}, {"counts", counts}};
    if (!r.prep.empty()) e["prep"] = r.prep;
    arr.push_back(e);
  }
  return arr;
}

TomoDataset TomoDataset::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ValidationError("tomography dataset must be a JSON array");
  TomoDataset d;
  for (const auto& e : j) {
    if (!e.is_object() || !e.contains("counts") || !e.at("counts").is_object()) {
      throw ValidationError("each tomography record needs a 'counts' object");
    }
    TomoRecord r;
    if (e.contains("prep")) r.prep = e.at("prep").get<std::string>();
    if (e.contains("setting")) r.setting = e.at("setting").get<std::string>();
    for (const auto& [k, v] : e.at("counts").items()) {
      if (!v.is_number()) throw ValidationError("count for '" + k + "' is not a number");
      r.counts[k] = v.get<double>();
    }
    d.records.push_back(std::move(r));
  }
  return d;
}

std::vector<std::string> qst_design(int n) {
  if (n < 1) throw ValidationError("qubit count must be >= 1");
  return product_labels("XYZ", n);
}

std::vector<std::string> prep_labels(int n) {
  if (n < 1) throw ValidationError("qubit count must be >= 1");
  return product_labels("01+i", n);
}

std::vector<std::pair<std::string, std::string>> qpt_design(int n) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& p : prep_labels(n))
    for (const auto& s : qst_design(n)) out.emplace_back(p, s);
  return out;
}

Circuit setting_rotation(const std::string& setting) {
  const int n = static_cast<int>(setting.size());
  Circuit c(n, 0);
  for (int q = 0; q < n; ++q) {
    switch (setting[static_cast<std::size_t>(n - 1 - q)]) {
      case 'X':
        c.u(q, kPi / 2, 0.0, kPi);
        break;
      case 'Y':
        c.u(q, kPi / 2, 0.0, kPi / 2);
        break;
      case 'Z':
        break;
      default:
        throw ValidationError("unknown measurement setting '" + setting + "'");
    }
  }
  return c;
}

Circuit prep_circuit(const std::string& prep) {
  const int n = static_cast<int>(prep.size());
  Circuit c(n, 0);
  for (int q = 0; q < n; ++q) {
    switch (prep[static_cast<std::size_t>(n - 1 - q)]) {
      case '0':
        break;
      case '1':
        c.x(q);
        break;
      case '+':
        c.h(q);
        break;
      case 'i':
        c.h(q).phase(q, kPi / 2);
        break;
      default:
        throw ValidationError("unknown preparation label '" + prep + "'");
    }
  }
  return c;
}

CVec prep_vector(const std::string& prep) {
  CVec v = CVec::Ones(1);
  const double s = 1.0 / std::sqrt(2.0);
  for (char ch : prep) {
    CVec q(2);
    switch (ch) {
      case '0':
        q << 1, 0;
        break;
      case '1':
        q << 0, 1;
        break;
      case '+':
        q << s, s;
        break;
      case 'i':
        q << s, cplx(0, s);
        break;
      default:
        throw ValidationError("unknown preparation label '" + prep + "'");
    }
    CVec next(v.size() * 2);
    for (Eigen::Index i = 0; i < v.size(); ++i) next.segment(2 * i, 2) = v(i) * q;
    v = next;
  }
  return v;
}

CMat prep_state(const std::string& prep) {
  const CVec v = prep_vector(prep);
  return v * v.adjoint();
}

CMat setting_effect(const std::string& setting, const std::string& bits) {
  if (setting.size() != bits.size()) throw ValidationError("outcome length does not match the setting");
  CMat out = CMat::Ones(1, 1);
  for (std::size_t i = 0; i < setting.size(); ++i) {
    const Eigen::Matrix2cd r = rotation_for(setting[i]);
    const int b = bits[i] == '1' ? 1 : 0;
    if (bits[i] != '0' && bits[i] != '1') throw ValidationError("outcome labels must be bitstrings");
    const Eigen::Vector2cd row = r.row(b).adjoint();  // R^dag |b>
    out = kron(out, CMat(row * row.adjoint()));
  }
  return out;
}

CMat choi_partial_trace_output(const CMat& choi) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(choi.rows()))));
  if (d * d != choi.rows() || choi.rows() != choi.cols()) throw ValidationError("Choi matrix must be d^2 x d^2");
  CMat t = CMat::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) t += choi.block(i * d, i * d, d, d);
  return t;
}

CMat choi_of_unitary(const CMat& u) {
  const Eigen::Index d = u.rows();
  CVec v(d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) v(i * d + j) = u(i, j);
  return v * v.adjoint();
}

CMat apply_choi(const CMat& choi, const CMat& rho) {
  const Eigen::Index d = rho.rows();
  if (choi.rows() != d * d) throw ValidationError("Choi and state dimensions do not match");
  CMat out = CMat::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index k = 0; k < d; ++k) {
      cplx acc = 0.0;
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index l = 0; l < d; ++l) acc += choi(i * d + j, k * d + l) * rho(j, l);
      out(i, k) = acc;
    }
  return out;
}

double log_likelihood(const TomoDataset& data, TomoKind kind, const CMat& matrix, const std::vector<CMat>& povm,
                      const std::vector<std::string>& outcomes) {
  const Problem pb = build_problem(data, kind);
  if (kind != TomoKind::Detector) return loglik_of(pb, {matrix});
  if (outcomes != pb.outcomes) throw ValidationError("POVM outcome labels do not match the dataset");
  return loglik_of(pb, povm);
}

MleResult linear_inversion(const TomoDataset& data, TomoKind kind, int rank) {
  const Problem pb = build_problem(data, kind);
  const int r = effective_rank(pb, rank);
  const auto x = project(pb, solve_linear(pb), r);
  MleResult res = package(pb, x, r);
  res.loglik_trace.push_back(loglik_of(pb, x));
  res.converged = true;
  return res;
}

MleResult reconstruct_mle(const TomoDataset& data, TomoKind kind, const MleConfig& cfg) {
  const Problem pb = build_problem(data, kind);
  const int r = effective_rank(pb, cfg.rank);
  std::vector<CMat> x = project(pb, solve_linear(pb), r);
  double l = loglik_of(pb, x);
  std::vector<double> trace = {l};
  double step = 1.0;
  bool converged = false;
  int iter = 0;
  for (; iter < cfg.max_iterations; ++iter) {
    std::vector<CMat> grad(x.size(), CMat::Zero(pb.block_dim, pb.block_dim));
    for (const auto& o : pb.obs) {
      if (o.k == 0.0) continue;
      const double p = std::max(model_probability(o, x), 1e-12);
      grad[static_cast<std::size_t>(o.block)] += (o.k / (p * pb.total)) * o.m;
    }
    std::vector<CMat> roots;
    for (const auto& xb : x) roots.push_back(root_of(xb, r));
    bool accepted = false;
    double l_new = l;
    std::vector<CMat> candidate;
    while (step > 1e-14) {
      candidate.clear();
      for (std::size_t b = 0; b < x.size(); ++b) {
        const CMat c = roots[b] + step * grad[b] * roots[b];
        candidate.push_back(c * c.adjoint());
      }
      candidate = project(pb, std::move(candidate), r);
      l_new = loglik_of(pb, candidate);
      if (l_new >= l) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      converged = true;
      break;
    }
    const double rel = (l_new - l) / std::max(std::abs(l), 1e-300);
    x = std::move(candidate);
    l = l_new;
    trace.push_back(l);
    step = std::min(step * 2.0, 1e6);
    if (rel < cfg.tolerance) {
      converged = true;
      ++iter;
      break;
    }
  }
  MleResult res = package(pb, x, r);
  res.loglik_trace = std::move(trace);
  res.iterations = iter;
  res.converged = converged;
  if (!converged) res.message = "iteration limit reached; returning last iterate";
  return res;
}

nlohmann::json matrix_to_json(const CMat& m) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json rr = nlohmann::json::array();
    nlohmann::json ri = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return {{"re", re}, {"im", im}};
}

CMat matrix_from_json(const nlohmann::json& j) {
  try {
    const auto& re = j.at("re");
    const auto rows = static_cast<Eigen::Index>(re.size());
    const auto cols = rows ? static_cast<Eigen::Index>(re.at(0).size()) : 0;
    CMat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) {
        const double im = j.contains("im") ? j.at("im").at(r).at(c).get<double>() : 0.0;
        m(r, c) = cplx(re.at(r).at(c).get<double>(), im);
      }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed matrix JSON: ") + e.what());
  }
}

nlohmann::json MleResult::to_json() const {
  nlohmann::json j;
  j["kind"] = kind == TomoKind::State ? "state" : kind == TomoKind::Process ? "process" : "detector";
  j["dim"] = dim;
  j["rank"] = rank;
  if (kind == TomoKind::Detector) {
    nlohmann::json effects = nlohmann::json::object();
    for (std::size_t i = 0; i < povm.size(); ++i) effects[outcomes[i]] = matrix_to_json(povm[i]);
    j["povm"] = effects;
  } else {
    j["matrix"] = matrix_to_json(matrix);
  }
  j["loglik_trace"] = loglik_trace;
  j["loglik"] = loglik();
  j["iterations"] = iterations;
  j["converged"] = converged;
  if (!message.empty()) j["message"] = message;
  return j;
}

QhtResult qht_extract(const CMat& choi, double tau) {
  if (!(tau > 0.0)) throw ValidationError("gate duration must be positive");
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(choi.rows()))));
  if (d * d != choi.rows() || choi.rows() != choi.cols()) throw ValidationError("Choi matrix must be d^2 x d^2");
  const CMat chi = hermitize(choi) * (static_cast<double>(d) / choi.trace().real());
  Eigen::SelfAdjointEigenSolver<CMat> es(chi);
  QhtResult res;
  res.top_eigenvalue = es.eigenvalues()(chi.rows() - 1);
  res.noisy = res.top_eigenvalue < 0.8 * static_cast<double>(d);
  const CVec e = es.eigenvectors().col(chi.rows() - 1);
  CMat u(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) u(i, j) = std::sqrt(static_cast<double>(d)) * e(i * d + j);
  // Nearest unitary (polar factor), then remove the determinant phase.
  Eigen::JacobiSVD<CMat> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  u = svd.matrixU() * svd.matrixV().adjoint();
  u *= std::polar(1.0, -std::arg(u.determinant()) / static_cast<double>(d));

  // Det fixing leaves a d-th root of unity free; keep the smallest generator,
  // ties going to the larger H(0,0).
  double best_norm = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < d; ++k) {
    const CMat cand = u * std::polar(1.0, 2.0 * kPi * static_cast<double>(k) / static_cast<double>(d));
    Eigen::ComplexSchur<CMat> schur(cand);
    const CMat& t = schur.matrixT();
    const CMat& q = schur.matrixU();
    CMat log_t = CMat::Zero(d, d);
    double norm = 0.0;
    bool ambiguous = false;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double phase = std::arg(t(j, j));
      if (kPi - std::abs(phase) < 1e-6) ambiguous = true;
      log_t(j, j) = cplx(0.0, phase);
      norm += phase * phase;
    }
    const CMat h = hermitize(cplx(0.0, 1.0) * q * log_t * q.adjoint() / tau);
    const bool tie = std::abs(norm - best_norm) < 1e-9;
    if ((!tie && norm < best_norm) || (tie && h(0, 0).real() > res.hamiltonian(0, 0).real())) {
      best_norm = std::min(norm, best_norm);
      res.unitary = cand;
      res.hamiltonian = h;
      res.branch_ambiguous = ambiguous;
    }
  }
  return res;
}

double fidelity_to_target(const CMat& rho, const CVec& psi) {
  if (rho.rows() != psi.size() || rho.cols() != psi.size()) throw ValidationError("state dimensions do not match");
  const CVec v = psi / psi.norm();
  return std::clamp((v.adjoint() * rho * v)(0, 0).real(), 0.0, 1.0);
}

double entanglement_fidelity(const CMat& choi, const CMat& u) {
  const Eigen::Index d = u.rows();
  if (choi.rows() != d * d || choi.cols() != d * d) throw ValidationError("Choi and unitary dimensions do not match");
  const CMat chi = choi * (static_cast<double>(d) / choi.trace().real());
  CVec v(d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) v(i * d + j) = u(i, j);
  const double f = (v.adjoint() * chi * v)(0, 0).real() / static_cast<double>(d * d);
  return std::clamp(f, 0.0, 1.0);
}

namespace {

TomoRecord sampled_record(const Circuit& body, const std::string& prep, const std::string& setting, std::int64_t shots,
                          const NoiseModel* noise, std::uint64_t seed) {
  Circuit c(body.n_qubits, body.n_qubits);
  c.append(body);
  c.append(setting_rotation(setting));
  c.measure_all();
  const auto hist = sample(c, shots, noise, seed);
  TomoRecord r{prep, setting, {}};
  for (const auto& [k, v] : hist.counts) r.counts[k] = static_cast<double>(v);
  return r;
}

}  // namespace

TomoDataset simulate_qst(const Circuit& prep, std::int64_t shots, const NoiseModel* noise, std::uint64_t seed) {
  const auto settings = qst_design(prep.n_qubits);
  TomoDataset d;
  d.records.resize(settings.size());
  parallel_for(settings.size(), [&](std::size_t i) {
    d.records[i] = sampled_record(prep, "", settings[i], shots, noise, splitmix64(seed + i));
  });
  return d;
}

TomoDataset simulate_qpt(const Circuit& process, std::int64_t shots, const NoiseModel* noise, std::uint64_t seed) {
  const auto design = qpt_design(process.n_qubits);
  TomoDataset d;
  d.records.resize(design.size());
  parallel_for(design.size(), [&](std::size_t i) {
    Circuit body = prep_circuit(design[i].first);
    body.append(process);
    d.records[i] = sampled_record(body, design[i].first, design[i].second, shots, noise, splitmix64(seed + i));
  });
  return d;
}

TomoDataset simulate_qdt(const Circuit& pre, std::int64_t shots, const NoiseModel* noise, std::uint64_t seed) {
  const auto probes = prep_labels(pre.n_qubits);
  const std::string z(static_cast<std::size_t>(pre.n_qubits), 'Z');
  TomoDataset d;
  d.records.resize(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) {
    Circuit body = prep_circuit(probes[i]);
    body.append(pre);
    d.records[i] = sampled_record(body, probes[i], z, shots, noise, splitmix64(seed + i));
  });
  return d;
}

TomoDataset expected_qst(const CMat& rho, double shots) {
  const int n = static_cast<int>(std::llround(std::log2(static_cast<double>(rho.rows()))));
  TomoDataset d;
  for (const auto& s : qst_design(n)) {
    TomoRecord r{"", s, {}};
    for (const auto& o : all_bitstrings(n)) r.counts[o] = shots * std::max(0.0, (setting_effect(s, o) * rho).trace().real());
    d.records.push_back(std::move(r));
  }
  return d;
}

TomoDataset expected_qpt(const CMat& choi, double shots) {
  const auto dd = static_cast<double>(choi.rows());
  const int n = static_cast<int>(std::llround(std::log2(std::sqrt(dd))));
  TomoDataset d;
  for (const auto& [p, s] : qpt_design(n)) {
    const CMat out = apply_choi(choi, prep_state(p));
    TomoRecord r{p, s, {}};
    for (const auto& o : all_bitstrings(n)) r.counts[o] = shots * std::max(0.0, (setting_effect(s, o) * out).trace().real());
    d.records.push_back(std::move(r));
  }
  return d;
}

}  // namespace qemul
