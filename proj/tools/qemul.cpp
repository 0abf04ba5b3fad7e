// qemul: batch front end for the emulator, photonic sampler, benchmarks, tomography and generators.
//
// Exit codes: 0 ok, 1 usage, 2 missing input file, 3 QASM parse error,
// 4 invalid noise config / input data / unitarity violation, 5 internal failure.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include "qemul/bench.hpp"
#include "qemul/circuits.hpp"
#include "qemul/parallel.hpp"
#include "qemul/photonic.hpp"
#include "qemul/qubo.hpp"
#include "qemul/simulator.hpp"
#include "qemul/tomo.hpp"
#include "qemul/trotter.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace qemul;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNotFound = 2, kParse = 3, kInvalid = 4, kInternal = 5 };

struct FileNotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

Circuit read_circuit(const std::string& path) { return parse_qasm(read_file(path)); }

CVec state_of(const Circuit& c) {
  const StateVector s = final_state(c);
  CVec v(static_cast<Eigen::Index>(s.dim()));
  for (std::size_t i = 0; i < s.dim(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

std::optional<NoiseModel> read_noise(const std::string& path) {
  if (path.empty()) return std::nullopt;
  if (!fs::exists(path)) throw FileNotFound("cannot open '" + path + "'");
  return load_noise_model(path);
}

/// Relative output names land in QEMUL_OUTPUT_DIR when the user did not pass -o.
std::string resolve_output(const std::string& given, const std::string& fallback) {
  if (!given.empty()) return given;
  const char* dir = std::getenv("QEMUL_OUTPUT_DIR");
  return dir && *dir ? (fs::path(dir) / fallback).string() : fallback;
}

/// Writes to a sibling temp file and renames on success, so failures never leave partial output.
void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path() && !fs::exists(target.parent_path())) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
  }
  fs::rename(tmp, target);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("bad number '" + item + "' in list '" + text + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------- option bundles

struct Global {
  std::uint64_t seed = 1;
  int threads = 0;
};

struct RunOpts {
  std::string input, noise, output, format = "json";
  std::int64_t shots = 1024;
};

struct BsOpts {
  std::string input, occupation, output, format = "lines";
  std::int64_t samples = 100;
  double loss = 0.0, eta = 1.0, dark = 0.0;
  int max_photons = kMaxBsPhotons, max_modes = 64;
};

struct RbOpts {
  std::string lengths = "1,2,4,8,16,32,64,128", noise, output, summary;
  int n_seq = 30;
  std::int64_t shots = 1000;
};

struct QvOpts {
  std::string noise, output, summary;
  int n_max = 5, n_c = 50, n_s = 500;
  bool factor2 = false;
};

struct TomoOpts {
  std::string data, circuit, noise, target, output, save_data;
  std::int64_t shots = 10000;
  int rank = 0, max_iter = 5000;
  double tau = 1.0;
};

struct GenOpts {
  std::string output, qubo, hamiltonian, betas, gammas, secret, prep_a, prep_b;
  int n = 3, iterations = -1, m = 1, steps = 1, order = 1;
  std::uint64_t marked = 0;
  double time = 1.0;
};

struct QuboOpts {
  std::string problem, output, prev;
  int bits = 3;
  double scale = 1.0;
  bool solve = false;
};

struct TrainOpts {
  std::vector<std::string> instances;
  std::string output;
  int layers = 1, restarts = 8, iterations = 200, random = 0, vars = 6;
};

// ---------------------------------------------------------------- commands

int cmd_run(const RunOpts& o, const Global& g) {
  const Circuit c = read_circuit(o.input);
  const auto noise = read_noise(o.noise);
  if (o.shots < 1) throw ValidationError("--shots must be at least 1");
  const CountsHistogram h = sample(c, o.shots, noise ? &*noise : nullptr, g.seed);
  std::string body;
  if (o.format == "csv") {
    body = "bitstring,count\n";
    for (const auto& [k, v] : h.counts) body += k + "," + std::to_string(v) + "\n";
  } else {
    body = dump(h.to_json());
  }
  const std::string out = resolve_output(o.output, fs::path(o.input).stem().string() + ".counts." + o.format);
  write_atomic(out, body);
  std::cout << "wrote " << h.shots << " shots to " << out << "\n";
  return kOk;
}

int cmd_bs(const BsOpts& o, const Global& g) {
  const CMat u = interferometer_from_json(read_json(o.input));
  const Occupation input = parse_occupation(o.occupation);
  if (static_cast<int>(input.size()) != u.rows())
    throw ValidationError("input occupation has " + std::to_string(input.size()) + " modes, interferometer has " +
                          std::to_string(u.rows()));
  if (u.rows() > o.max_modes) throw ValidationError("mode count exceeds --max-modes");
  int photons = 0;
  for (int k : input) photons += k;
  if (photons > o.max_photons) throw ValidationError("photon count exceeds --max-photons");
  BsNoise noise;
  if (o.loss > 0) noise.loss.assign(static_cast<std::size_t>(u.rows()), o.loss);
  noise.eta = o.eta;
  noise.dark_prob = o.dark;
  const auto samples = bs_sample(u, input, o.samples, noise, g.seed);
  std::string body;
  if (o.format == "json") {
    json arr = json::array();
    for (const auto& s : samples) arr.push_back(occupation_string(s));
    body = dump(arr);
  } else {
    for (const auto& s : samples) body += occupation_string(s) + "\n";
  }
  const std::string out = resolve_output(o.output, "samples." + std::string(o.format == "json" ? "json" : "txt"));
  write_atomic(out, body);
  std::cout << "wrote " << samples.size() << " samples to " << out << "\n";
  return kOk;
}

int cmd_rb(const RbOpts& o, const Global& g) {
  std::vector<int> lengths;
  for (double v : parse_list(o.lengths)) lengths.push_back(static_cast<int>(v));
  const auto noise = read_noise(o.noise);
  const RbResult r = rb_experiment(lengths, o.n_seq, o.shots, noise ? *noise : NoiseModel{}, g.seed);
  const std::string csv = resolve_output(o.output, "rb.csv");
  const std::string summary = resolve_output(o.summary, "rb.json");
  write_atomic(csv, r.to_csv());
  write_atomic(summary, dump(r.to_json()));
  std::printf("gamma = %.6f  A = %.6f  B = %.6f  avg gate fidelity = %.6f%s\n", r.fit.gamma, r.fit.a, r.fit.b,
              r.avg_gate_fidelity, r.fit.ok ? "" : ("  (fit: " + r.fit.message + ")").c_str());
  return kOk;
}

int cmd_qv(const QvOpts& o, const Global& g) {
  const auto noise = read_noise(o.noise);
  const QvResult r = qv_experiment(o.n_max, o.n_c, o.n_s, noise ? &*noise : nullptr, g.seed, o.factor2);
  write_atomic(resolve_output(o.output, "qv.csv"), r.to_csv());
  write_atomic(resolve_output(o.summary, "qv.json"), dump(r.to_json()));
  for (const auto& rec : r.records)
    std::printf("n = %d  h_est = %.5f  heavy fraction = %.5f  %s\n", rec.n, rec.h_est, rec.heavy_fraction,
                rec.passed ? "pass" : "fail");
  std::printf("QV = %lld\n", static_cast<long long>(r.quantum_volume));
  return kOk;
}

TomoDataset tomo_data(const TomoOpts& o, TomoKind kind, const Global& g) {
  if (o.data.empty() == o.circuit.empty()) throw ValidationError("give exactly one of --data or --circuit");
  if (!o.data.empty()) return TomoDataset::from_json(read_json(o.data));
  const Circuit c = read_circuit(o.circuit);
  const auto noise = read_noise(o.noise);
  const NoiseModel* nm = noise ? &*noise : nullptr;
  TomoDataset d = kind == TomoKind::State     ? simulate_qst(c, o.shots, nm, g.seed)
                  : kind == TomoKind::Process ? simulate_qpt(c, o.shots, nm, g.seed)
                                              : simulate_qdt(c, o.shots, nm, g.seed);
  if (!o.save_data.empty()) write_atomic(o.save_data, dump(d.to_json()));
  return d;
}

int cmd_tomo(const std::string& which, const TomoOpts& o, const Global& g) {
  const TomoKind kind = which == "qst" ? TomoKind::State : which == "qdt" ? TomoKind::Detector : TomoKind::Process;
  const TomoDataset data = tomo_data(o, kind, g);
  MleConfig cfg;
  cfg.rank = o.rank;
  cfg.max_iterations = o.max_iter;
  const MleResult r = reconstruct_mle(data, kind, cfg);
  json report = r.to_json();
  if (!o.target.empty()) {
    const Circuit t = read_circuit(o.target);
    if (kind == TomoKind::State) report["fidelity"] = fidelity_to_target(r.matrix, state_of(t));
    if (kind == TomoKind::Process) report["fidelity"] = entanglement_fidelity(r.matrix, circuit_unitary(t));
  }
  if (which == "qht") {
    const QhtResult q = qht_extract(r.matrix, o.tau);
    report["hamiltonian"] = matrix_to_json(q.hamiltonian);
    report["unitary"] = matrix_to_json(q.unitary);
    report["top_eigenvalue"] = q.top_eigenvalue;
    report["noisy"] = q.noisy;
    report["branch_ambiguous"] = q.branch_ambiguous;
  }
  const std::string out = resolve_output(o.output, which + ".json");
  write_atomic(out, dump(report));
  std::printf("%s: %d iterations, log-likelihood %.6f%s\n", which.c_str(), r.iterations, r.loglik(),
              r.converged ? "" : " (not converged)");
  if (report.contains("fidelity")) std::printf("fidelity = %.6f\n", report["fidelity"].get<double>());
  std::cout << "wrote " << out << "\n";
  return kOk;
}

int cmd_gen(const std::string& which, const GenOpts& o) {
  Circuit c;
  if (which == "grover") {
    const int it = o.iterations >= 0
                       ? o.iterations
                       : static_cast<int>(std::floor(kPi / (4 * std::asin(std::pow(2.0, -o.n / 2.0)))));
    c = grover(o.n, o.marked, it);
  } else if (which == "bv") {
    c = bernstein_vazirani(o.secret);
  } else if (which == "ghz") {
    c = ghz(o.n);
  } else if (which == "swaptest") {
    c = swap_test(o.m, o.prep_a.empty() ? std::vector<double>{} : parse_list(o.prep_a),
                  o.prep_b.empty() ? std::vector<double>{} : parse_list(o.prep_b));
  } else if (which == "qaoa") {
    const QuboProblem q = QuboProblem::from_json(read_json(o.qubo));
    FixedAngles a{parse_list(o.betas), parse_list(o.gammas)};
    if (a.betas.size() != a.gammas.size() || a.betas.empty())
      throw ValidationError("--betas and --gammas need the same non-zero length");
    c = qaoa_circuit(q, a);
  } else {
    const PauliHamiltonian h = PauliHamiltonian::from_json(read_json(o.hamiltonian));
    c = trotter_circuit(h, o.time, o.steps, o.order);
  }
  const std::string out = resolve_output(o.output, which + ".qasm");
  write_atomic(out, emit_qasm(c));
  std::cout << "wrote " << c.instructions.size() << " instructions to " << out << "\n";
  return kOk;
}

Eigen::MatrixXd matrix_of(const json& j, const char* key) {
  const auto& rows = j.at(key);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != static_cast<std::size_t>(m.cols())) throw ValidationError(std::string(key) + " is ragged");
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_of(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

OdeProblem ode_of(const json& j) {
  OdeProblem ode;
  ode.f2 = j.at("f2").get<std::vector<double>>();
  ode.f1 = j.at("f1").get<std::vector<double>>();
  ode.f0 = j.at("f0").get<std::vector<double>>();
  ode.g = j.at("g").get<std::vector<double>>();
  ode.n_t = static_cast<int>(ode.f2.size());
  ode.y0 = j.value("y0", 0.0);
  ode.y1 = j.value("y1", 0.0);
  ode.x_lo = j.value("x_lo", 0.0);
  ode.x_hi = j.value("x_hi", 1.0);
  return ode;
}

int cmd_qubo(const std::string& which, const QuboOpts& o) {
  const json p = read_json(o.problem);
  QuboProblem q;
  try {
    if (which == "from-linsys") {
      q = qubo_from_linear_system(matrix_of(p, "a"), vector_of(p.at("b")), o.bits);
    } else {
      const OdeProblem ode = ode_of(p);
      q = o.prev.empty() ? qubo_from_ode(ode, o.bits, o.scale) : refine(ode, o.bits, vector_of(read_json(o.prev)), o.scale);
    }
  } catch (const json::exception& e) {
    throw ValidationError("'" + o.problem + "': " + e.what());
  }
  const std::string out = resolve_output(o.output, "qubo.json");
  write_atomic(out, dump(q.to_json()));
  std::cout << "wrote " << q.n << "-variable QUBO to " << out << "\n";
  if (o.solve) {
    const std::uint64_t best = brute_force_minimum(q);
    const Eigen::VectorXd x = q.decode_bits(best);
    std::printf("minimum %.12g at", q.energy_bits(best));
    for (Eigen::Index i = 0; i < x.size(); ++i) std::printf(" %.10g", x(i));
    std::printf("\n");
  }
  return kOk;
}

int cmd_train(const TrainOpts& o, const Global& g) {
  std::vector<QuboProblem> inst;
  for (const auto& path : o.instances) inst.push_back(QuboProblem::from_json(read_json(path)));
  Rng rng(splitmix64(g.seed ^ 0x5bd1e995ULL));
  for (int i = 0; i < o.random; ++i) inst.push_back(random_maxcut(o.vars, rng));
  TrainConfig cfg;
  cfg.restarts = o.restarts;
  cfg.max_iterations = o.iterations;
  const TrainResult r = train_fixed_angles(inst, o.layers, cfg, g.seed);
  json j{{"betas", r.angles.betas}, {"gammas", r.angles.gammas}, {"min_success", r.min_success},
         {"per_instance", r.per_instance}};
  json baseline = json::array();
  for (const auto& q : inst)
    baseline.push_back(static_cast<double>(brute_force_optima(q).size()) / std::ldexp(1.0, q.n));
  j["uniform_baseline"] = baseline;
  const std::string out = resolve_output(o.output, "angles.json");
  write_atomic(out, dump(j));
  std::printf("min success probability %.6f over %zu instances\n", r.min_success, inst.size());
  std::cout << "wrote " << out << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qemul: quantum processor emulation and benchmarking"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "Seed for every random stream");
  app.add_option("--threads", g.threads, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);

  RunOpts run;
  auto* run_cmd = app.add_subcommand("run", "Sample a QASM circuit");
  run_cmd->add_option("input", run.input, "OpenQASM 2.0 file")->required();
  run_cmd->add_option("--shots", run.shots, "Shot count");
  run_cmd->add_option("--noise", run.noise, "Noise config JSON");
  run_cmd->add_option("-o,--output", run.output, "Output file");
  run_cmd->add_option("--format", run.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  BsOpts bs;
  auto* bs_cmd = app.add_subcommand("bs", "Boson sampling from an interferometer file");
  bs_cmd->add_option("interferometer", bs.input, "Interferometer JSON")->required();
  bs_cmd->add_option("--input", bs.occupation, "Input occupations, e.g. 101")->required();
  bs_cmd->add_option("--samples", bs.samples, "Sample count")->check(CLI::NonNegativeNumber);
  bs_cmd->add_option("--loss", bs.loss, "Per-mode loss probability");
  bs_cmd->add_option("--eta", bs.eta, "Indistinguishability");
  bs_cmd->add_option("--dark", bs.dark, "Dark-count probability");
  bs_cmd->add_option("--max-photons", bs.max_photons, "Guard on photon count");
  bs_cmd->add_option("--max-modes", bs.max_modes, "Guard on mode count");
  bs_cmd->add_option("-o,--output", bs.output, "Output file");
  bs_cmd->add_option("--format", bs.format, "lines or json")->check(CLI::IsMember({"lines", "json"}));

  auto* bench_cmd = app.add_subcommand("bench", "Randomized benchmarking and quantum volume");
  bench_cmd->require_subcommand(1);
  bench_cmd->fallthrough();
  RbOpts rb;
  auto* rb_cmd = bench_cmd->add_subcommand("rb", "Single-qubit Clifford randomized benchmarking");
  rb_cmd->add_option("--lengths", rb.lengths, "Comma-separated sequence lengths");
  rb_cmd->add_option("--nseq", rb.n_seq, "Sequences per length");
  rb_cmd->add_option("--shots", rb.shots, "Shots per sequence");
  rb_cmd->add_option("--noise", rb.noise, "Noise config JSON");
  rb_cmd->add_option("-o,--output", rb.output, "CSV output");
  rb_cmd->add_option("--summary", rb.summary, "JSON summary output");
  QvOpts qv;
  auto* qv_cmd = bench_cmd->add_subcommand("qv", "Quantum volume");
  qv_cmd->add_option("--nmax", qv.n_max, "Largest width");
  qv_cmd->add_option("--nc", qv.n_c, "Circuits per width");
  qv_cmd->add_option("--ns", qv.n_s, "Shots per circuit");
  qv_cmd->add_option("--noise", qv.noise, "Noise config JSON");
  qv_cmd->add_flag("--hest-factor2", qv.factor2, "Use a two-sigma margin in h_est");
  qv_cmd->add_option("-o,--output", qv.output, "CSV output");
  qv_cmd->add_option("--summary", qv.summary, "JSON summary output");

  auto* tomo_cmd = app.add_subcommand("tomo", "State, process, detector and Hamiltonian tomography");
  tomo_cmd->require_subcommand(1);
  tomo_cmd->fallthrough();
  TomoOpts tomo;
  std::string tomo_which;
  for (const char* name : {"qst", "qpt", "qdt", "qht"}) {
    auto* s = tomo_cmd->add_subcommand(name, std::string("Maximum-likelihood ") + name);
    s->add_option("--data", tomo.data, "Dataset JSON");
    s->add_option("--circuit", tomo.circuit, "Simulate data from this QASM circuit instead");
    s->add_option("--noise", tomo.noise, "Noise config for --circuit");
    s->add_option("--shots", tomo.shots, "Shots per setting for --circuit");
    s->add_option("--save-data", tomo.save_data, "Also write the simulated dataset");
    s->add_option("--rank", tomo.rank, "Rank of the root parameterization (0 = full)");
    s->add_option("--max-iter", tomo.max_iter, "Iteration cap");
    s->add_option("--target", tomo.target, "Target QASM circuit for the fidelity field");
    s->add_option("-o,--output", tomo.output, "Report JSON");
    if (std::string(name) == "qht") s->add_option("--tau", tomo.tau, "Gate duration");
    s->callback([&tomo_which, name] { tomo_which = name; });
  }

  auto* gen_cmd = app.add_subcommand("gen", "Circuit generators");
  gen_cmd->require_subcommand(1);
  gen_cmd->fallthrough();
  GenOpts gen;
  std::string gen_which;
  auto tag = [&gen_which](CLI::App* s, const char* name) { s->callback([&gen_which, name] { gen_which = name; }); };
  auto* g_grover = gen_cmd->add_subcommand("grover", "Grover search");
  g_grover->add_option("n", gen.n, "Qubits")->required();
  g_grover->add_option("marked", gen.marked, "Marked basis index")->required();
  g_grover->add_option("--iterations", gen.iterations, "Iterations (default: optimal)");
  auto* g_bv = gen_cmd->add_subcommand("bv", "Bernstein-Vazirani");
  g_bv->add_option("secret", gen.secret, "Secret bitstring")->required();
  auto* g_ghz = gen_cmd->add_subcommand("ghz", "GHZ preparation");
  g_ghz->add_option("n", gen.n, "Qubits")->required();
  auto* g_swap = gen_cmd->add_subcommand("swaptest", "Swap test");
  g_swap->add_option("m", gen.m, "Qubits per register")->required();
  g_swap->add_option("--prep-a", gen.prep_a, "Comma-separated RY angles for register A");
  g_swap->add_option("--prep-b", gen.prep_b, "Comma-separated RY angles for register B");
  auto* g_qaoa = gen_cmd->add_subcommand("qaoa", "QAOA circuit for a QUBO");
  g_qaoa->add_option("--qubo", gen.qubo, "QUBO JSON")->required();
  g_qaoa->add_option("--betas", gen.betas, "Comma-separated mixer angles")->required();
  g_qaoa->add_option("--gammas", gen.gammas, "Comma-separated phase angles")->required();
  auto* g_trot = gen_cmd->add_subcommand("trotter", "Product-formula evolution");
  g_trot->add_option("--hamiltonian", gen.hamiltonian, "Pauli Hamiltonian JSON")->required();
  g_trot->add_option("--time", gen.time, "Evolution time");
  g_trot->add_option("--steps", gen.steps, "Trotter steps");
  g_trot->add_option("--order", gen.order, "1, 2, 4, 6, ...");
  for (auto* s : {g_grover, g_bv, g_ghz, g_swap, g_qaoa, g_trot}) {
    s->add_option("-o,--output", gen.output, "Output QASM");
    tag(s, s->get_name() == "grover"     ? "grover"
           : s->get_name() == "bv"       ? "bv"
           : s->get_name() == "ghz"      ? "ghz"
           : s->get_name() == "swaptest" ? "swaptest"
           : s->get_name() == "qaoa"     ? "qaoa"
                                         : "trotter");
  }

  auto* qubo_cmd = app.add_subcommand("qubo", "QUBO encoders");
  qubo_cmd->require_subcommand(1);
  qubo_cmd->fallthrough();
  QuboOpts qubo;
  std::string qubo_which;
  for (const char* name : {"from-linsys", "from-ode"}) {
    auto* s = qubo_cmd->add_subcommand(name, name == std::string("from-linsys") ? "Linear system {\"a\", \"b\"}"
                                                                                : "ODE {f2, f1, f0, g, y0, y1, x_lo, x_hi}");
    s->add_option("problem", qubo.problem, "Problem JSON")->required();
    s->add_option("-k,--bits", qubo.bits, "Bits per variable");
    s->add_option("-o,--output", qubo.output, "QUBO JSON output");
    s->add_flag("--solve", qubo.solve, "Brute-force the minimum and print the decoded solution");
    if (std::string(name) == "from-ode") {
      s->add_option("--scale", qubo.scale, "Encoding window half-width");
      s->add_option("--prev", qubo.prev, "Previous solution (JSON array) to refine around");
    }
    s->callback([&qubo_which, name] { qubo_which = name; });
  }

  auto* qaoa_cmd = app.add_subcommand("qaoa", "Fixed-angle QAOA");
  qaoa_cmd->require_subcommand(1);
  qaoa_cmd->fallthrough();
  TrainOpts train;
  auto* train_cmd = qaoa_cmd->add_subcommand("train", "Train shared angles over a set of instances");
  train_cmd->add_option("instances", train.instances, "QUBO JSON files");
  train_cmd->add_option("--random", train.random, "Add this many random Max-Cut instances");
  train_cmd->add_option("--vars", train.vars, "Variables per random instance");
  train_cmd->add_option("-p,--layers", train.layers, "QAOA depth");
  train_cmd->add_option("--restarts", train.restarts, "Optimizer restarts");
  train_cmd->add_option("--iterations", train.iterations, "Iterations per restart");
  train_cmd->add_option("-o,--output", train.output, "Angles JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (g.threads > 0) set_num_threads(g.threads);
    if (run_cmd->parsed()) return cmd_run(run, g);
    if (bs_cmd->parsed()) return cmd_bs(bs, g);
    if (rb_cmd->parsed()) return cmd_rb(rb, g);
    if (qv_cmd->parsed()) return cmd_qv(qv, g);
    if (!tomo_which.empty()) return cmd_tomo(tomo_which, tomo, g);
    if (!gen_which.empty()) return cmd_gen(gen_which, gen);
    if (!qubo_which.empty()) return cmd_qubo(qubo_which, qubo);
    if (train_cmd->parsed()) return cmd_train(train, g);
    std::cerr << app.help();
    return kUsage;
  } catch (const FileNotFound& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNotFound;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
