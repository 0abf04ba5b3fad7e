#include "qemul/trotter.hpp"

#include <cmath>

namespace qemul {

int PauliHamiltonian::n_qubits() const { return terms.empty() ? 0 : static_cast<int>(terms.front().second.size()); }

void PauliHamiltonian::validate() const {
  if (terms.empty()) throw ValidationError("Hamiltonian has no terms");
  const std::size_t n = terms.front().second.size();
  if (n == 0) throw ValidationError("empty Pauli string");
  for (const auto& [h, p] : terms) {
    if (!std::isfinite(h)) throw ValidationError("non-finite Hamiltonian coefficient");
    if (p.size() != n) throw ValidationError("Pauli strings must have uniform length");
    for (char ch : p) {
      if (ch != 'I' && ch != 'X' && ch != 'Y' && ch != 'Z') throw ValidationError("invalid Pauli letter in '" + p + "'");
    }
  }
}

namespace {

Eigen::Matrix2cd pauli_matrix(char c) {
  Eigen::Matrix2cd m;
  switch (c) {
    case 'X':
      m << 0, 1, 1, 0;
      break;
    case 'Y':
      m << 0, cplx(0, -1), cplx(0, 1), 0;
      break;
    case 'Z':
      m << 1, 0, 0, -1;
      break;
    default:
      m.setIdentity();
  }
  return m;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

CMat pauli_string_matrix(const std::string& p) {
  CMat m = CMat::Identity(1, 1);
  for (char c : p) m = kron(m, pauli_matrix(c));
  return m;
}

bool is_identity(const std::string& p) { return p.find_first_not_of('I') == std::string::npos; }

}  // namespace

CMat PauliHamiltonian::matrix() const {
  validate();
  const Eigen::Index d = Eigen::Index{1} << n_qubits();
  CMat m = CMat::Zero(d, d);
  for (const auto& [h, p] : terms) m += h * pauli_string_matrix(p);
  return m;
}

nlohmann::json PauliHamiltonian::to_json() const {
  nlohmann::json t = nlohmann::json::array();
  for (const auto& [h, p] : terms) t.push_back({h, p});
  return {{"terms", t}};
}

PauliHamiltonian PauliHamiltonian::from_json(const nlohmann::json& j) {
  PauliHamiltonian h;
  try {
    for (const auto& t : j.at("terms")) {
      if (!t.is_array() || t.size() != 2) throw ValidationError("Hamiltonian terms are [coeff, pauli] pairs");
      h.terms.emplace_back(t.at(0).get<double>(), t.at(1).get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed Hamiltonian JSON: ") + e.what());
  }
  h.validate();
  return h;
}

bool qubitwise_commute(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) throw ValidationError("Pauli strings of different length");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != 'I' && b[i] != 'I' && a[i] != b[i]) return false;
  }
  return true;
}

std::vector<std::vector<int>> group_commuting(const PauliHamiltonian& h) {
  std::vector<std::vector<int>> families;
  for (int i = 0; i < static_cast<int>(h.terms.size()); ++i) {
    const auto& p = h.terms[static_cast<std::size_t>(i)].second;
    bool placed = false;
    for (auto& fam : families) {
      bool ok = true;
      for (int j : fam) {
        if (!qubitwise_commute(p, h.terms[static_cast<std::size_t>(j)].second)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        fam.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) families.push_back({i});
  }
  return families;
}

void append_pauli_exponential(Circuit& c, const std::string& pauli, double theta) {
  const int n = static_cast<int>(pauli.size());
  if (n > c.n_qubits) throw ValidationError("Pauli string longer than the circuit register");
  std::vector<int> active;
  for (int q = 0; q < n; ++q) {
    const char ch = pauli[static_cast<std::size_t>(n - 1 - q)];
    if (ch != 'I') active.push_back(q);
  }
  if (active.empty()) return;
  auto letter = [&](int q) { return pauli[static_cast<std::size_t>(n - 1 - q)]; };
  for (int q : active) {
    if (letter(q) == 'X') c.h(q);
    if (letter(q) == 'Y') c.rx(q, kPi / 2);
  }
  for (std::size_t k = 0; k + 1 < active.size(); ++k) c.cx(active[k], active[k + 1]);
  c.rz(active.back(), 2.0 * theta);
  for (std::size_t k = active.size() - 1; k > 0; --k) c.cx(active[k - 1], active[k]);
  for (int q : active) {
    if (letter(q) == 'X') c.h(q);
    if (letter(q) == 'Y') c.rx(q, -kPi / 2);
  }
}

double suzuki_coefficient(int k) {
  if (k < 2) throw ValidationError("Suzuki recursion starts at k = 2");
  return 1.0 / (4.0 - std::pow(4.0, 1.0 / (2.0 * k - 1.0)));
}

namespace {

using TermList = std::vector<std::pair<double, std::string>>;

void first_order(Circuit& c, const TermList& terms, double tau) {
  for (const auto& [h, p] : terms) append_pauli_exponential(c, p, h * tau);
}

void second_order(Circuit& c, const TermList& terms, double tau) {
  for (const auto& [h, p] : terms) append_pauli_exponential(c, p, h * tau / 2);
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) append_pauli_exponential(c, it->second, it->first * tau / 2);
}

void suzuki(Circuit& c, const TermList& terms, double tau, int order) {
  if (order == 2) {
    second_order(c, terms, tau);
    return;
  }
  const double s = suzuki_coefficient(order / 2);
  suzuki(c, terms, s * tau, order - 2);
  suzuki(c, terms, s * tau, order - 2);
  suzuki(c, terms, (1 - 4 * s) * tau, order - 2);
  suzuki(c, terms, s * tau, order - 2);
  suzuki(c, terms, s * tau, order - 2);
}

}  // namespace

Circuit trotter_circuit(const PauliHamiltonian& h, double t, int r, int order) {
  h.validate();
  if (r < 1) throw ValidationError("Trotter step count must be >= 1");
  if (order < 1 || (order > 1 && order % 2 != 0)) throw ValidationError("product-formula order must be 1 or even");
  TermList terms;
  for (const auto& fam : group_commuting(h)) {
    for (int i : fam) {
      const auto& term = h.terms[static_cast<std::size_t>(i)];
      if (!is_identity(term.second) && term.first != 0.0) terms.push_back(term);
    }
  }
  Circuit c(h.n_qubits(), 0);
  const double tau = t / r;
  for (int step = 0; step < r; ++step) {
    if (order == 1) {
      first_order(c, terms, tau);
    } else {
      suzuki(c, terms, tau, order);
    }
  }
  return c;
}

CMat exact_evolution(const PauliHamiltonian& h, double t) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h.matrix());
  const Eigen::VectorXd& ev = es.eigenvalues();
  CVec phases(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) phases(i) = std::polar(1.0, -t * ev(i));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double trotter_error(const PauliHamiltonian& h, double t, int r, int order) {
  PauliHamiltonian stripped;
  for (const auto& term : h.terms) {
    if (!is_identity(term.second)) stripped.terms.push_back(term);
  }
  const int n = h.n_qubits();
  if (stripped.terms.empty()) stripped.terms.emplace_back(0.0, std::string(static_cast<std::size_t>(n), 'I'));
  const CMat exact = exact_evolution(stripped, t);
  Circuit c = trotter_circuit(stripped, t, r, order);
  c.n_qubits = n;
  return spectral_norm(circuit_unitary(c) - exact);
}

}  // namespace qemul
