#include "qemul/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <thread>
#include <unordered_map>

#include "qemul/parallel.hpp"

namespace qemul {

namespace {

std::atomic<int> g_threads{0};

}  // namespace

int num_threads() {
  const int n = g_threads.load();
  if (n > 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_num_threads(int n) {
  if (n < 0) throw ValidationError("thread count must be >= 0 (0 = all cores)");
  g_threads.store(n);
}

double CountsHistogram::frequency(const std::string& outcome) const {
  if (shots == 0) return 0.0;
  auto it = counts.find(outcome);
  return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(shots);
}

nlohmann::json CountsHistogram::to_json() const {
  nlohmann::json c = nlohmann::json::object();
  for (const auto& [k, v] : counts) c[k] = v;
  return {{"counts", c}, {"shots", shots}, {"seed", seed}};
}

CountsHistogram CountsHistogram::from_json(const nlohmann::json& j) {
  CountsHistogram h;
  try {
    for (const auto& [k, v] : j.at("counts").items()) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ValidationError("count for '" + k + "' must be a non-negative integer");
      h.counts[k] = v.get<std::int64_t>();
    }
    h.shots = j.at("shots").get<std::int64_t>();
    if (j.contains("seed")) h.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed histogram: ") + e.what());
  }
  std::int64_t total = 0;
  for (const auto& [k, v] : h.counts) total += v;
  if (total != h.shots) throw ValidationError("histogram counts do not sum to shots");
  return h;
}

std::string to_bitstring(std::uint64_t value, int width) {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int i = 0; i < width; ++i) {
    if ((value >> i) & 1) s[static_cast<std::size_t>(width - 1 - i)] = '1';
  }
  return s;
}

StateVector final_state(const Circuit& circuit) {
  circuit.validate();
  StateVector state(circuit.n_qubits);
  for (const auto& ins : circuit.instructions) {
    if (ins.kind == GateKind::Measure || ins.kind == GateKind::Barrier) continue;
    if (ins.kind == GateKind::Reset) throw ValidationError("reset has no unitary action");
    apply_instruction(state, ins);
  }
  return state;
}

Distribution probabilities(const Circuit& circuit) { return {final_state(circuit).probabilities()}; }

bool has_terminal_measurements(const Circuit& circuit) {
  std::vector<char> measured(static_cast<std::size_t>(circuit.n_qubits), 0);
  for (const auto& ins : circuit.instructions) {
    if (ins.kind == GateKind::Barrier) continue;
    if (ins.kind == GateKind::Reset) return false;
    for (int q : ins.qubits) {
      if (measured[static_cast<std::size_t>(q)]) return false;
    }
    if (ins.kind == GateKind::Measure) measured[static_cast<std::size_t>(ins.qubits[0])] = 1;
  }
  return true;
}

std::string run_shot(const Circuit& circuit, const CompiledNoise* noise, Rng& rng) {
  StateVector state(circuit.n_qubits);
  std::string bits(static_cast<std::size_t>(circuit.n_clbits), '0');
  ShotContext ctx;
  if (noise) noise->apply_prep(state, rng);
  for (const auto& ins : circuit.instructions) {
    switch (ins.kind) {
      case GateKind::Barrier:
        break;
      case GateKind::Measure: {
        int bit = measure_qubit(state, ins.qubits[0], rng);
        if (noise) bit = noise->apply_readout(ins.qubits[0], bit, rng);
        bits[static_cast<std::size_t>(circuit.n_clbits - 1 - ins.clbits[0])] = static_cast<char>('0' + bit);
        break;
      }
      case GateKind::Reset:
        if (measure_qubit(state, ins.qubits[0], rng) == 1) state.apply_x(ins.qubits[0]);
        break;
      default:
        if (noise) {
          noise->apply_gate(state, ins, ctx, rng);
        } else {
          apply_instruction(state, ins);
        }
    }
  }
  return bits;
}

namespace {

CountsHistogram sample_exact(const Circuit& circuit, const CompiledNoise* noise, std::int64_t shots, std::uint64_t seed) {
  StateVector state(circuit.n_qubits);
  ShotContext ctx;
  Rng unused(0);
  std::vector<std::pair<int, int>> measures;  // (qubit, clbit)
  for (const auto& ins : circuit.instructions) {
    if (ins.kind == GateKind::Barrier) continue;
    if (ins.kind == GateKind::Measure) {
      measures.emplace_back(ins.qubits[0], ins.clbits[0]);
      continue;
    }
    if (noise) {
      noise->apply_gate(state, ins, ctx, unused);
    } else {
      apply_instruction(state, ins);
    }
  }

  // Marginal over the classical register.
  std::unordered_map<std::uint64_t, double> marginal;
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const double p = std::norm(amps[i]);
    if (p == 0.0) continue;
    std::uint64_t c = 0;
    for (const auto& [q, cb] : measures) {
      const std::uint64_t bit = std::uint64_t{1} << cb;
      c = ((i >> q) & 1) ? (c | bit) : (c & ~bit);
    }
    marginal[c] += p;
  }
  std::vector<std::pair<std::uint64_t, double>> support(marginal.begin(), marginal.end());
  std::sort(support.begin(), support.end());
  std::vector<double> cdf(support.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) cdf[i] = (acc += support[i].second);

  std::vector<std::int64_t> tally(support.size(), 0);
  for (std::int64_t s = 0; s < shots; ++s) {
    Rng rng = derive_stream(seed, static_cast<std::uint64_t>(s));
    const double u = uniform01(rng) * acc;
    std::size_t idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (idx >= support.size()) idx = support.size() - 1;
    ++tally[idx];
  }
  CountsHistogram h;
  h.shots = shots;
  h.seed = seed;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (tally[i] > 0) h.counts[to_bitstring(support[i].first, circuit.n_clbits)] = tally[i];
  }
  return h;
}

}  // namespace

CountsHistogram sample(const Circuit& circuit, std::int64_t shots, const NoiseModel* noise, std::uint64_t seed) {
  if (shots < 1) throw ValidationError("shots must be >= 1");
  circuit.validate();
  std::optional<CompiledNoise> compiled;
  if (noise) compiled.emplace(*noise);
  const CompiledNoise* cn = compiled ? &*compiled : nullptr;

  const bool stochastic = noise && noise->is_stochastic();
  if (!stochastic && circuit.n_clbits <= 64 && has_terminal_measurements(circuit)) {
    return sample_exact(circuit, cn, shots, seed);
  }

  const std::size_t n_chunks = std::min<std::size_t>(static_cast<std::size_t>(shots), 256);
  std::vector<std::map<std::string, std::int64_t>> partial(n_chunks);
  parallel_for(n_chunks, [&](std::size_t chunk) {
    const auto begin = static_cast<std::int64_t>(chunk) * shots / static_cast<std::int64_t>(n_chunks);
    const auto end = static_cast<std::int64_t>(chunk + 1) * shots / static_cast<std::int64_t>(n_chunks);
    auto& local = partial[chunk];
    for (std::int64_t s = begin; s < end; ++s) {
      Rng rng = derive_stream(seed, static_cast<std::uint64_t>(s));
      ++local[run_shot(circuit, cn, rng)];
    }
  });
  CountsHistogram h;
  h.shots = shots;
  h.seed = seed;
  for (const auto& local : partial) {
    for (const auto& [k, v] : local) h.counts[k] += v;
  }
  return h;
}

}  // namespace qemul
