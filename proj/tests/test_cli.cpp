#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qemul/qasm.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("qemul_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  static std::string read(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  /// Runs the CLI with stdout captured to `stdout.txt`; returns the exit status.
  int run(const std::string& args, const std::string& env = "") const {
    const std::string cmd = "cd '" + dir_.string() + "' && " + env + " '" + QEMUL_CLI_PATH + "' " + args + " > stdout.txt 2> stderr.txt";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  std::string out() const { return read(path("stdout.txt")); }

  fs::path dir_;
};

const char* kBell = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncreg c[2];\nh q[0];\ncx q[0],q[1];\nmeasure q -> c;\n";

}  // namespace

TEST_F(Cli, RunWritesCountsAndIsDeterministic) {
  write("bell.qasm", kBell);
  ASSERT_EQ(run("run bell.qasm --shots 1000 --seed 7 -o a.json"), 0);
  ASSERT_EQ(run("run bell.qasm --shots 1000 --seed 7 -o b.json --threads 1"), 0);
  const auto j = nlohmann::json::parse(read(path("a.json")));
  std::int64_t total = 0;
  for (const auto& [k, v] : j["counts"].items()) {
    EXPECT_TRUE(k == "00" || k == "11");
    total += v.get<std::int64_t>();
  }
  EXPECT_EQ(total, 1000);
  EXPECT_EQ(read(path("a.json")), read(path("b.json")));
}

TEST_F(Cli, RunCsvAndOutputDirectoryOverride) {
  write("bell.qasm", kBell);
  fs::create_directories(path("outdir"));
  ASSERT_EQ(run("run bell.qasm --shots 10 --format csv", "QEMUL_OUTPUT_DIR=outdir"), 0);
  const std::string csv = read(path("outdir/bell.counts.csv"));
  EXPECT_EQ(csv.rfind("bitstring,count\n", 0), 0u);
}

TEST_F(Cli, ErrorExitCodes) {
  write("bad.qasm", "OPENQASM 2.0;\nqreg q[2];\nfoo q[0];\n");
  EXPECT_EQ(run("run bad.qasm -o bad.json"), 3);
  EXPECT_FALSE(fs::exists(path("bad.json")));
  EXPECT_EQ(run("run missing.qasm -o x.json"), 2);
  EXPECT_FALSE(fs::exists(path("x.json")));

  write("bell.qasm", kBell);
  write("noise.json", R"({"gates": {"rx": {"channel": {"type": "amplitude", "a": 1.5}}}})");
  EXPECT_EQ(run("run bell.qasm --noise noise.json -o y.json"), 4);
  EXPECT_FALSE(fs::exists(path("y.json")));
  EXPECT_EQ(run("run bell.qasm --noise nope.json -o y.json"), 2);

  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("run bell.qasm --shots notanumber"), 1);
  EXPECT_EQ(run("--help"), 0);
  for (const auto& e : fs::directory_iterator(dir_)) EXPECT_EQ(e.path().string().find(".tmp"), std::string::npos);
}

TEST_F(Cli, BosonSampling) {
  write("id.json", R"({"unitary": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]})");
  ASSERT_EQ(run("bs id.json --input 101 --samples 10 -o s.txt"), 0);
  std::string expect;
  for (int i = 0; i < 10; ++i) expect += "101\n";
  EXPECT_EQ(read(path("s.txt")), expect);

  write("bad.json", R"({"unitary": [[1, 0.1], [0, 1]]})");
  EXPECT_EQ(run("bs bad.json --input 10 --samples 10 -o t.txt"), 4);
  EXPECT_FALSE(fs::exists(path("t.txt")));

  write("bs.json", R"({"unitary": [[{"re": 0.7071067811865476, "im": 0}, {"re": 0.7071067811865476, "im": 0}],
                                    [{"re": 0.7071067811865476, "im": 0}, {"re": -0.7071067811865476, "im": 0}]]})");
  ASSERT_EQ(run("bs bs.json --input 11 --samples 200 --seed 3 -o u.txt"), 0);
  ASSERT_EQ(run("bs bs.json --input 11 --samples 200 --seed 3 -o v.txt"), 0);
  EXPECT_EQ(read(path("u.txt")), read(path("v.txt")));
  EXPECT_EQ(read(path("u.txt")).find("11"), std::string::npos);
}

TEST_F(Cli, QuantumVolumeSummary) {
  ASSERT_EQ(run("bench qv --nmax 3 --nc 200 --ns 100 --seed 1 -o qv.csv --summary qv.json"), 0);
  EXPECT_NE(out().find("QV = 8"), std::string::npos) << out();
  EXPECT_EQ(nlohmann::json::parse(read(path("qv.json")))["quantum_volume"].get<int>(), 8);
}

TEST_F(Cli, RandomizedBenchmarking) {
  ASSERT_EQ(run("bench rb --lengths 1,4,16 --nseq 3 --shots 50 --seed 2"), 0);
  const auto j = nlohmann::json::parse(read(path("rb.json")));
  EXPECT_EQ(j["lengths"].size(), 3u);
  EXPECT_NE(read(path("rb.csv")).find("length,survival"), std::string::npos);
}

TEST_F(Cli, GeneratorsRoundTrip) {
  ASSERT_EQ(run("gen ghz 4 -o ghz4.qasm"), 0);
  const qemul::Circuit c = qemul::parse_qasm(read(path("ghz4.qasm")));
  EXPECT_EQ(c.n_qubits, 4);
  EXPECT_EQ(qemul::parse_qasm(qemul::emit_qasm(c)), c);

  ASSERT_EQ(run("gen grover 3 5 -o g.qasm"), 0);
  ASSERT_EQ(run("gen bv 1011 -o bv.qasm"), 0);
  ASSERT_EQ(run("gen swaptest 2 --prep-a 0.1,0.2 -o sw.qasm"), 0);
  write("h.json", R"({"terms": [[0.5, "XI"], [0.25, "ZZ"]]})");
  ASSERT_EQ(run("gen trotter --hamiltonian h.json --time 1 --steps 2 --order 2 -o t.qasm"), 0);
  write("q.json", R"({"n": 2, "terms": [[0, 1, 1.0]]})");
  ASSERT_EQ(run("gen qaoa --qubo q.json --betas 0.3 --gammas 0.7 -o qa.qasm"), 0);
  for (const char* f : {"g.qasm", "bv.qasm", "sw.qasm", "t.qasm", "qa.qasm"}) EXPECT_NO_THROW(qemul::parse_qasm(read(path(f)))) << f;
  EXPECT_EQ(run("gen trotter --hamiltonian h.json --order 3 -o bad.qasm"), 4);
}

TEST_F(Cli, TomographyPipeline) {
  write("prep.qasm", "OPENQASM 2.0;\nqreg q[1];\nU(1.1, 0.3, 0) q[0];\n");
  ASSERT_EQ(run("tomo qst --circuit prep.qasm --shots 5000 --rank 1 --target prep.qasm --save-data d.json -o r.json"), 0);
  const auto r = nlohmann::json::parse(read(path("r.json")));
  EXPECT_GT(r["fidelity"].get<double>(), 0.99);
  ASSERT_EQ(run("tomo qst --data d.json --rank 1 -o r2.json"), 0);
  EXPECT_EQ(nlohmann::json::parse(read(path("r2.json")))["matrix"], r["matrix"]);

  write("rx.qasm", "OPENQASM 2.0;\nqreg q[1];\nrx(0.4) q[0];\n");
  ASSERT_EQ(run("tomo qht --circuit rx.qasm --shots 20000 --tau 1 -o h.json"), 0);
  EXPECT_TRUE(nlohmann::json::parse(read(path("h.json"))).contains("hamiltonian"));
  EXPECT_EQ(run("tomo qst -o z.json"), 4);
}

TEST_F(Cli, QuboEncoders) {
  write("ls.json", R"({"a": [[1, 0], [0, 1]], "b": [-1, 0.25]})");
  ASSERT_EQ(run("qubo from-linsys ls.json -k 3 --solve -o q.json"), 0);
  EXPECT_NE(out().find(" -1 0.25"), std::string::npos) << out();
  EXPECT_EQ(nlohmann::json::parse(read(path("q.json")))["n"].get<int>(), 6);

  write("ode.json", R"({"f2": [1,1,1,1,1,1], "f1": [0,0,0,0,0,0], "f0": [0,0,0,0,0,0], "g": [-2,-2,-2,-2,-2,-2]})");
  ASSERT_EQ(run("qubo from-ode ode.json -k 4 -o o.json"), 0);
  EXPECT_EQ(nlohmann::json::parse(read(path("o.json")))["n"].get<int>(), 16);
  write("bad.json", R"({"a": [[1, 0, 0], [0, 1, 0]], "b": [1, 1]})");
  EXPECT_EQ(run("qubo from-linsys bad.json -o z.json"), 4);
}

TEST_F(Cli, QaoaTraining) {
  write("q.json", R"({"n": 2, "terms": [[0, 1, 1.0]]})");
  ASSERT_EQ(run("qaoa train q.json --restarts 2 --iterations 30 -o a.json"), 0);
  const auto j = nlohmann::json::parse(read(path("a.json")));
  EXPECT_GE(j["min_success"].get<double>(), 0.5);
  EXPECT_EQ(j["betas"].size(), 1u);
}
