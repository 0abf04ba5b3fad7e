#include "qemul/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace qemul {

namespace {

using Op = std::vector<cplx>;

const Op kI = {1, 0, 0, 1};
const Op kX = {0, 1, 1, 0};
const Op kY = {0, cplx(0, -1), cplx(0, 1), 0};
const Op kZ = {1, 0, 0, -1};

Op scaled(const Op& m, double s) {
  Op out(m);
  for (auto& v : out) v *= s;
  return out;
}

Op kron(const Op& a, const Op& b) {
  Op out(16);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out[(2 * i + k) * 4 + 2 * j + l] = a[2 * i + j] * b[2 * k + l];
  return out;
}

Op matmul(const Op& a, const Op& b, int d) {
  Op out(d * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      for (int j = 0; j < d; ++j) out[i * d + j] += a[i * d + k] * b[k * d + j];
  return out;
}

Op dagger_times(const Op& a, int d) {
  Op out(d * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) out[i * d + j] += std::conj(a[k * d + i]) * a[k * d + j];
  return out;
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw NoiseConfigError(std::string(what) + " must lie in [0,1]");
}

}  // namespace

double KrausSet::completeness_error() const {
  Op sum(dim * dim, 0.0);
  for (const auto& k : operators) {
    const Op kk = dagger_times(k, dim);
    for (int i = 0; i < dim * dim; ++i) sum[i] += kk[i];
  }
  double err = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) err = std::max(err, std::abs(sum[i * dim + j] - (i == j ? 1.0 : 0.0)));
  return err;
}

void KrausSet::detect_fixed_weights() {
  fixed_weights.clear();
  std::vector<double> w;
  for (const auto& k : operators) {
    const Op kk = dagger_times(k, dim);
    const double c = kk[0].real();
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        if (std::abs(kk[i * dim + j] - (i == j ? c : 0.0)) > 1e-14) return;
      }
    w.push_back(c);
  }
  fixed_weights = std::move(w);
}

double dephasing_time(double t1, double t2) {
  if (!(t1 > 0.0) || !(t2 > 0.0)) throw NoiseConfigError("T1 and T2 must be positive");
  if (t2 > 2.0 * t1) throw NoiseConfigError("T2 must not exceed 2*T1");
  const double denom = 2.0 * t1 - t2;
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return t1 * t2 / denom;
}

KrausSet build_channel(const ChannelSpec& spec) {
  KrausSet ks;
  const auto& p = spec.params;
  auto need = [&](std::size_t n) {
    if (p.size() != n) throw NoiseConfigError("channel expects " + std::to_string(n) + " parameter(s)");
  };
  switch (spec.type) {
    case ChannelType::Amplitude: {
      need(1);
      check_probability(p[0], "amplitude damping a");
      ks.label = "amplitude";
      ks.operators = {{1, 0, 0, std::sqrt(1 - p[0])}, {0, std::sqrt(p[0]), 0, 0}};
      break;
    }
    case ChannelType::Phase: {
      need(1);
      check_probability(p[0], "phase damping b");
      ks.label = "phase";
      ks.operators = {{1, 0, 0, std::sqrt(1 - p[0])}, {0, 0, 0, std::sqrt(p[0])}};
      break;
    }
    case ChannelType::T1T2: {
      need(3);
      if (p[2] < 0.0) throw NoiseConfigError("relaxation time must be non-negative");
      const double tphi = dephasing_time(p[0], p[1]);
      const double a = 1.0 - std::exp(-p[2] / p[0]);
      const double b = std::isinf(tphi) ? 0.0 : 1.0 - std::exp(-p[2] / tphi);
      const KrausSet amp = build_channel(ChannelSpec::amplitude(a));
      const KrausSet ph = build_channel(ChannelSpec::phase(b));
      ks.label = "t1t2";
      for (const auto& kp : ph.operators) {
        for (const auto& ka : amp.operators) {
          Op prod = matmul(kp, ka, 2);
          double norm = 0.0;
          for (const auto& v : prod) norm += std::norm(v);
          if (norm > 1e-30) ks.operators.push_back(std::move(prod));
        }
      }
      break;
    }
    case ChannelType::Depolarizing1: {
      need(1);
      check_probability(p[0], "depolarizing p");
      ks.label = "depolarizing1";
      ks.operators = {scaled(kI, std::sqrt(1 - p[0])), scaled(kX, std::sqrt(p[0] / 3)),
                      scaled(kY, std::sqrt(p[0] / 3)), scaled(kZ, std::sqrt(p[0] / 3))};
      break;
    }
    case ChannelType::Depolarizing2: {
      need(1);
      check_probability(p[0], "depolarizing p");
      ks.label = "depolarizing2";
      ks.dim = 4;
      const Op* paulis[4] = {&kI, &kX, &kY, &kZ};
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          const double w = (a == 0 && b == 0) ? 1 - p[0] : p[0] / 15;
          ks.operators.push_back(scaled(kron(*paulis[a], *paulis[b]), std::sqrt(w)));
        }
      break;
    }
    case ChannelType::Pauli: {
      need(3);
      for (double v : p) check_probability(v, "Pauli error probability");
      const double pi = 1.0 - p[0] - p[1] - p[2];
      if (pi < -1e-12) throw NoiseConfigError("Pauli error probabilities sum above 1");
      ks.label = "pauli";
      ks.operators = {scaled(kI, std::sqrt(std::max(pi, 0.0))), scaled(kX, std::sqrt(p[0])),
                      scaled(kY, std::sqrt(p[1])), scaled(kZ, std::sqrt(p[2]))};
      break;
    }
    case ChannelType::ReadoutFlip: {
      need(1);
      check_probability(p[0], "readout flip p");
      ks.label = "readout_flip";
      ks.operators = {scaled(kI, std::sqrt(1 - p[0])), scaled(kX, std::sqrt(p[0]))};
      break;
    }
  }
  ks.detect_fixed_weights();
  return ks;
}

int apply_channel_stochastic(StateVector& state, const KrausSet& kraus, std::span<const int> targets, Rng& rng) {
  const int d = kraus.dim;
  if ((std::size_t{1} << targets.size()) != static_cast<std::size_t>(d)) {
    throw ValidationError("Kraus dimension does not match the number of targets");
  }
  const std::size_t n_ops = kraus.operators.size();
  std::vector<double> probs(n_ops);

  if (!kraus.fixed_weights.empty()) {
    probs = kraus.fixed_weights;
  } else {
    // Reduced density matrix of the targets; p_a = Tr(K_a^dag K_a rho).
    std::vector<std::size_t> offsets(d, 0);
    std::size_t mask = 0;
    const int k = static_cast<int>(targets.size());
    for (int l = 0; l < d; ++l)
      for (int j = 0; j < k; ++j)
        if ((l >> (k - 1 - j)) & 1) offsets[l] |= std::size_t{1} << targets[j];
    for (int t : targets) mask |= std::size_t{1} << t;
    std::vector<cplx> rho(d * d, 0.0);
    const auto amps = state.amplitudes();
    for (std::size_t base = 0; base < amps.size(); ++base) {
      if (base & mask) continue;
      for (int a = 0; a < d; ++a) {
        const cplx va = amps[base | offsets[a]];
        if (va == cplx(0.0, 0.0)) continue;
        for (int b = 0; b < d; ++b) rho[a * d + b] += va * std::conj(amps[base | offsets[b]]);
      }
    }
    for (std::size_t i = 0; i < n_ops; ++i) {
      const Op kk = dagger_times(kraus.operators[i], d);
      cplx tr = 0.0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) tr += kk[a * d + b] * rho[b * d + a];
      probs[i] = std::max(tr.real(), 0.0);
    }
  }

  double total = 0.0;
  for (double p : probs) total += p;
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConsistencyError("Kraus branch probabilities sum to " + std::to_string(total) + " (channel '" +
                           kraus.label + "' is not trace preserving)");
  }
  const double u = uniform01(rng) * total;
  std::size_t chosen = n_ops - 1;
  double acc = 0.0;
  for (std::size_t i = 0; i < n_ops; ++i) {
    acc += probs[i];
    if (u < acc && probs[i] > 0.0) {
      chosen = i;
      break;
    }
  }
  while (probs[chosen] <= 0.0 && chosen > 0) --chosen;
  std::vector<cplx> op = kraus.operators[chosen];
  const double scale = 1.0 / std::sqrt(probs[chosen]);
  for (auto& v : op) v *= scale;
  state.apply_matrix(op, targets);
  if (kraus.fixed_weights.empty()) state.normalize();
  return static_cast<int>(chosen);
}

// ---------------------------------------------------------------------------

void NoiseModel::validate() const {
  auto check_angle = [](const AngleError& e) {
    if (!(e.sigma_m >= 0.0) || !(e.sigma_nm >= 0.0)) throw NoiseConfigError("angle-error std-devs must be >= 0");
    if (!std::isfinite(e.theta_c)) throw NoiseConfigError("theta_c must be finite");
  };
  for (const auto& [kind, g] : gates) {
    if (!is_unitary(kind) || kind == GateKind::Barrier) {
      throw NoiseConfigError("noise cannot attach to '" + std::string(kind_name(kind)) + "'");
    }
    for (const auto& ch : g.channels) {
      if (ch.n_qubits() > qubit_arity(kind)) {
        throw NoiseConfigError("two-qubit channel attached to single-qubit gate '" + std::string(kind_name(kind)) + "'");
      }
      build_channel(ch);
    }
    check_angle(g.theta);
    check_angle(g.phi);
    if ((g.theta.active() || g.phi.active()) && !is_native_rotation(kind)) {
      throw NoiseConfigError("angle errors only apply to native rotations, not '" + std::string(kind_name(kind)) + "'");
    }
    if (g.phi.active() && kind != GateKind::R) throw NoiseConfigError("phi angle errors only apply to r");
  }
  for (const auto& [q, qn] : qubits) {
    if (q < 0) throw NoiseConfigError("negative qubit index in noise config");
    if (qn.t1.has_value() != qn.t2.has_value()) throw NoiseConfigError("T1 and T2 must be given together");
    if (qn.t1) dephasing_time(*qn.t1, *qn.t2);
    if (qn.prep) check_probability(*qn.prep, "prep flip");
    if (qn.readout) check_probability(*qn.readout, "readout flip");
  }
  for (const auto& [kind, t] : durations) {
    if (!(t >= 0.0)) throw NoiseConfigError("gate durations must be non-negative");
  }
  check_probability(prep_flip, "prep flip");
  check_probability(readout_flip, "readout flip");
}

bool NoiseModel::is_stochastic() const {
  for (const auto& [kind, g] : gates) {
    if (!g.channels.empty() || g.theta.sigma_m > 0 || g.theta.sigma_nm > 0 || g.phi.sigma_m > 0 || g.phi.sigma_nm > 0)
      return true;
  }
  if (prep_flip > 0 || readout_flip > 0) return true;
  bool any_duration = false;
  for (const auto& [kind, t] : durations) any_duration |= t > 0;
  for (const auto& [q, qn] : qubits) {
    if ((qn.prep && *qn.prep > 0) || (qn.readout && *qn.readout > 0)) return true;
    if (qn.t1 && any_duration) return true;
  }
  return false;
}

double NoiseModel::prep_flip_for(int qubit) const {
  auto it = qubits.find(qubit);
  if (it != qubits.end() && it->second.prep) return *it->second.prep;
  return prep_flip;
}

double NoiseModel::readout_flip_for(int qubit) const {
  auto it = qubits.find(qubit);
  if (it != qubits.end() && it->second.readout) return *it->second.readout;
  return readout_flip;
}

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw NoiseConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok |= it.key() == a;
    if (!ok) throw NoiseConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

double number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw NoiseConfigError("missing '" + std::string(key) + "' in " + where);
  const auto& v = j.at(key);
  if (!v.is_number()) throw NoiseConfigError("'" + std::string(key) + "' in " + where + " must be a number");
  return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

ChannelSpec parse_channel(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw NoiseConfigError(where + " needs a string 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "amplitude") {
    reject_unknown(j, {"type", "a"}, where);
    return ChannelSpec::amplitude(number(j, "a", where));
  }
  if (type == "phase") {
    reject_unknown(j, {"type", "b"}, where);
    return ChannelSpec::phase(number(j, "b", where));
  }
  if (type == "t1t2") {
    reject_unknown(j, {"type", "T1", "T2", "t"}, where);
    return ChannelSpec::t1t2(number(j, "T1", where), number(j, "T2", where), number(j, "t", where));
  }
  if (type == "depolarizing1" || type == "depolarizing2" || type == "readout_flip") {
    reject_unknown(j, {"type", "p"}, where);
    const double p = number(j, "p", where);
    if (type == "depolarizing1") return ChannelSpec::depolarizing1(p);
    if (type == "depolarizing2") return ChannelSpec::depolarizing2(p);
    return ChannelSpec::readout_flip(p);
  }
  if (type == "pauli") {
    reject_unknown(j, {"type", "px", "py", "pz"}, where);
    return ChannelSpec::pauli(number_or(j, "px", 0, where), number_or(j, "py", 0, where), number_or(j, "pz", 0, where));
  }
  throw NoiseConfigError("unknown channel type '" + type + "' in " + where);
}

json channel_to_json(const ChannelSpec& c) {
  const auto& p = c.params;
  switch (c.type) {
    case ChannelType::Amplitude:
      return {{"type", "amplitude"}, {"a", p[0]}};
    case ChannelType::Phase:
      return {{"type", "phase"}, {"b", p[0]}};
    case ChannelType::T1T2:
      return {{"type", "t1t2"}, {"T1", p[0]}, {"T2", p[1]}, {"t", p[2]}};
    case ChannelType::Depolarizing1:
      return {{"type", "depolarizing1"}, {"p", p[0]}};
    case ChannelType::Depolarizing2:
      return {{"type", "depolarizing2"}, {"p", p[0]}};
    case ChannelType::Pauli:
      return {{"type", "pauli"}, {"px", p[0]}, {"py", p[1]}, {"pz", p[2]}};
    case ChannelType::ReadoutFlip:
      return {{"type", "readout_flip"}, {"p", p[0]}};
  }
  return {};
}

AngleError parse_angle(const json& j, const std::string& where, bool allow_phi) {
  if (allow_phi) {
    reject_unknown(j, {"theta_c", "sigma_m", "sigma_nm", "phi"}, where);
  } else {
    reject_unknown(j, {"theta_c", "sigma_m", "sigma_nm"}, where);
  }
  return {number_or(j, "theta_c", 0, where), number_or(j, "sigma_m", 0, where), number_or(j, "sigma_nm", 0, where)};
}

json angle_to_json(const AngleError& e) { return {{"theta_c", e.theta_c}, {"sigma_m", e.sigma_m}, {"sigma_nm", e.sigma_nm}}; }

GateKind gate_kind_key(const std::string& key) {
  try {
    return kind_from_name(key);
  } catch (const ValidationError&) {
    throw NoiseConfigError("unknown gate kind '" + key + "' in noise config");
  }
}

int qubit_key(const std::string& key) {
  if (key.empty() || key.find_first_not_of("0123456789") != std::string::npos) {
    throw NoiseConfigError("qubit key '" + key + "' is not a non-negative integer");
  }
  return std::stoi(key);
}

}  // namespace

NoiseModel NoiseModel::from_json(const json& j) {
  reject_unknown(j, {"gates", "qubits", "durations", "spam"}, "noise config");
  NoiseModel m;
  if (j.contains("gates")) {
    const auto& gates = j.at("gates");
    if (!gates.is_object()) throw NoiseConfigError("'gates' must be an object");
    for (auto it = gates.begin(); it != gates.end(); ++it) {
      const GateKind kind = gate_kind_key(it.key());
      const std::string where = "gates." + it.key();
      reject_unknown(*it, {"channel", "angle_errors", "coherent"}, where);
      GateNoise g;
      if (it->contains("channel")) {
        const auto& ch = it->at("channel");
        if (ch.is_array()) {
          for (const auto& c : ch) g.channels.push_back(parse_channel(c, where + ".channel"));
        } else {
          g.channels.push_back(parse_channel(ch, where + ".channel"));
        }
      }
      if (it->contains("angle_errors")) {
        const auto& ae = it->at("angle_errors");
        g.theta = parse_angle(ae, where + ".angle_errors", true);
        if (ae.contains("phi")) g.phi = parse_angle(ae.at("phi"), where + ".angle_errors.phi", false);
      }
      if (it->contains("coherent")) {
        const auto& co = it->at("coherent");
        reject_unknown(co, {"rx", "ry", "rz"}, where + ".coherent");
        g.coherent_rx = number_or(co, "rx", 0, where);
        g.coherent_ry = number_or(co, "ry", 0, where);
        g.coherent_rz = number_or(co, "rz", 0, where);
      }
      m.gates[kind] = std::move(g);
    }
  }
  if (j.contains("qubits")) {
    const auto& qs = j.at("qubits");
    if (!qs.is_object()) throw NoiseConfigError("'qubits' must be an object");
    for (auto it = qs.begin(); it != qs.end(); ++it) {
      const std::string where = "qubits." + it.key();
      reject_unknown(*it, {"T1", "T2", "prep", "readout"}, where);
      QubitNoise qn;
      if (it->contains("T1")) qn.t1 = number(*it, "T1", where);
      if (it->contains("T2")) qn.t2 = number(*it, "T2", where);
      if (it->contains("prep")) qn.prep = number(*it, "prep", where);
      if (it->contains("readout")) qn.readout = number(*it, "readout", where);
      m.qubits[qubit_key(it.key())] = qn;
    }
  }
  if (j.contains("durations")) {
    const auto& ds = j.at("durations");
    if (!ds.is_object()) throw NoiseConfigError("'durations' must be an object");
    for (auto it = ds.begin(); it != ds.end(); ++it) {
      if (!it->is_number()) throw NoiseConfigError("duration of '" + it.key() + "' must be a number");
      m.durations[gate_kind_key(it.key())] = it->get<double>();
    }
  }
  if (j.contains("spam")) {
    const auto& sp = j.at("spam");
    reject_unknown(sp, {"prep", "readout"}, "spam");
    m.prep_flip = number_or(sp, "prep", 0, "spam");
    m.readout_flip = number_or(sp, "readout", 0, "spam");
  }
  m.validate();
  return m;
}

nlohmann::json NoiseModel::to_json() const {
  json j = json::object();
  json gs = json::object();
  for (const auto& [kind, g] : gates) {
    json e = json::object();
    if (g.channels.size() == 1) {
      e["channel"] = channel_to_json(g.channels[0]);
    } else if (!g.channels.empty()) {
      json arr = json::array();
      for (const auto& c : g.channels) arr.push_back(channel_to_json(c));
      e["channel"] = arr;
    }
    if (g.theta.active() || g.phi.active()) {
      e["angle_errors"] = angle_to_json(g.theta);
      if (g.phi.active()) e["angle_errors"]["phi"] = angle_to_json(g.phi);
    }
    if (g.has_coherent()) e["coherent"] = {{"rx", g.coherent_rx}, {"ry", g.coherent_ry}, {"rz", g.coherent_rz}};
    gs[std::string(kind_name(kind))] = e;
  }
  if (!gs.empty()) j["gates"] = gs;
  json qs = json::object();
  for (const auto& [q, qn] : qubits) {
    json e = json::object();
    if (qn.t1) e["T1"] = *qn.t1;
    if (qn.t2) e["T2"] = *qn.t2;
    if (qn.prep) e["prep"] = *qn.prep;
    if (qn.readout) e["readout"] = *qn.readout;
    qs[std::to_string(q)] = e;
  }
  if (!qs.empty()) j["qubits"] = qs;
  json ds = json::object();
  for (const auto& [kind, t] : durations) ds[std::string(kind_name(kind))] = t;
  if (!ds.empty()) j["durations"] = ds;
  if (prep_flip != 0.0 || readout_flip != 0.0) j["spam"] = {{"prep", prep_flip}, {"readout", readout_flip}};
  return j;
}

NoiseModel load_noise_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NoiseConfigError("cannot open noise config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw NoiseConfigError("noise config '" + path + "' is not valid JSON: " + e.what());
  }
  return NoiseModel::from_json(j);
}

// ---------------------------------------------------------------------------

double ShotContext::non_markov_offset(GateKind kind, const std::vector<int>& qubits, int angle, double sigma,
                                      Rng& rng) {
  auto key = std::make_tuple(kind, qubits, angle);
  auto it = draws_.find(key);
  if (it != draws_.end()) return it->second;
  const double v = std::normal_distribution<double>(0.0, sigma)(rng);
  draws_.emplace(std::move(key), v);
  return v;
}

Instruction perturb_angles(const Instruction& instr, const NoiseModel& model, ShotContext& ctx, Rng& rng) {
  auto it = model.gates.find(instr.kind);
  if (it == model.gates.end() || !is_native_rotation(instr.kind)) return instr;
  Instruction out = instr;
  auto perturb = [&](int index, const AngleError& e) {
    if (!e.active()) return;
    double delta = e.theta_c;
    if (e.sigma_m > 0) delta += std::normal_distribution<double>(0.0, e.sigma_m)(rng);
    if (e.sigma_nm > 0) delta += ctx.non_markov_offset(instr.kind, instr.qubits, index, e.sigma_nm, rng);
    out.params[index] += delta;
  };
  perturb(0, it->second.theta);
  if (instr.kind == GateKind::R) perturb(1, it->second.phi);
  return out;
}

CompiledNoise::CompiledNoise(const NoiseModel& model) : model_(model) {
  model_.validate();
  for (const auto& [kind, g] : model_.gates) {
    auto& sets = gate_channels_[kind];
    for (const auto& ch : g.channels) sets.push_back(build_channel(ch));
  }
  for (const auto& [kind, t] : model_.durations) {
    if (t <= 0) continue;
    for (const auto& [q, qn] : model_.qubits) {
      if (qn.t1) relaxation_[{kind, q}] = build_channel(ChannelSpec::t1t2(*qn.t1, *qn.t2, t));
    }
  }
}

void CompiledNoise::apply_gate(StateVector& state, const Instruction& instr, ShotContext& ctx, Rng& rng) const {
  const auto git = model_.gates.find(instr.kind);
  if (git != model_.gates.end() && is_native_rotation(instr.kind)) {
    apply_instruction(state, perturb_angles(instr, model_, ctx, rng));
  } else {
    apply_instruction(state, instr);
  }
  if (git != model_.gates.end()) {
    const GateNoise& g = git->second;
    if (g.has_coherent()) {
      for (int q : instr.qubits) {
        if (g.coherent_rx != 0.0) state.apply_1q(rx_matrix(g.coherent_rx), q);
        if (g.coherent_ry != 0.0) state.apply_1q(ry_matrix(g.coherent_ry), q);
        if (g.coherent_rz != 0.0) state.apply_1q(rz_matrix(g.coherent_rz), q);
      }
    }
    for (const auto& ks : gate_channels_.at(instr.kind)) {
      if (ks.n_qubits() == static_cast<int>(instr.qubits.size())) {
        apply_channel_stochastic(state, ks, instr.qubits, rng);
      } else {
        for (int q : instr.qubits) apply_channel_stochastic(state, ks, std::span<const int>(&q, 1), rng);
      }
    }
  }
  if (!relaxation_.empty()) {
    for (int q : instr.qubits) {
      auto rit = relaxation_.find({instr.kind, q});
      if (rit != relaxation_.end()) apply_channel_stochastic(state, rit->second, std::span<const int>(&q, 1), rng);
    }
  }
}

void CompiledNoise::apply_prep(StateVector& state, Rng& rng) const {
  for (int q = 0; q < state.n_qubits(); ++q) {
    const double p = model_.prep_flip_for(q);
    if (p > 0 && uniform01(rng) < p) state.apply_x(q);
  }
}

int CompiledNoise::apply_readout(int qubit, int bit, Rng& rng) const {
  const double p = model_.readout_flip_for(qubit);
  if (p > 0 && uniform01(rng) < p) return bit ^ 1;
  return bit;
}

}  // namespace qemul
