#include "qemul/qasm.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>

namespace qemul {

namespace {

struct KindInfo {
  GateKind kind;
  std::string_view name;
  int params;
  int arity;
};

constexpr std::array<KindInfo, 11> kKinds{{
    {GateKind::U, "u", 3, 1},
    {GateKind::CX, "cx", 0, 2},
    {GateKind::R, "r", 2, 1},
    {GateKind::RX, "rx", 1, 1},
    {GateKind::RY, "ry", 1, 1},
    {GateKind::RZ, "rz", 1, 1},
    {GateKind::RXX, "rxx", 1, 2},
    {GateKind::RZZ, "rzz", 1, 2},
    {GateKind::Measure, "measure", 0, 1},
    {GateKind::Barrier, "barrier", 0, -1},
    {GateKind::Reset, "reset", 0, 1},
}};

const KindInfo& info(GateKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  throw ValidationError("unknown gate kind");
}

}  // namespace

std::string_view kind_name(GateKind kind) { return info(kind).name; }

GateKind kind_from_name(std::string_view name) {
  for (const auto& k : kKinds) {
    if (k.name == name) return k.kind;
  }
  throw ValidationError("unknown gate kind '" + std::string(name) + "'");
}

int param_count(GateKind kind) { return info(kind).params; }
int qubit_arity(GateKind kind) { return info(kind).arity; }

bool is_unitary(GateKind kind) {
  return kind != GateKind::Measure && kind != GateKind::Barrier && kind != GateKind::Reset;
}

bool is_native_rotation(GateKind kind) {
  switch (kind) {
    case GateKind::R:
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::RXX:
    case GateKind::RZZ:
      return true;
    default:
      return false;
  }
}

void Circuit::validate() const {
  if (n_qubits < 0 || n_clbits < 0) throw ValidationError("negative register size");
  for (std::size_t i = 0; i < instructions.size(); ++i) {
    const auto& ins = instructions[i];
    const auto where = " (instruction " + std::to_string(i) + ")";
    const int arity = qubit_arity(ins.kind);
    if (arity >= 0 && static_cast<int>(ins.qubits.size()) != arity) {
      throw ValidationError(std::string(kind_name(ins.kind)) + " expects " + std::to_string(arity) +
                            " qubit(s)" + where);
    }
    if (static_cast<int>(ins.params.size()) != param_count(ins.kind)) {
      throw ValidationError(std::string(kind_name(ins.kind)) + " expects " +
                            std::to_string(param_count(ins.kind)) + " parameter(s)" + where);
    }
    if (ins.kind == GateKind::Barrier && ins.qubits.empty()) throw ValidationError("empty barrier" + where);
    const std::size_t want_clbits = ins.kind == GateKind::Measure ? 1 : 0;
    if (ins.clbits.size() != want_clbits) {
      throw ValidationError("classical bit count mismatch" + where);
    }
    std::set<int> seen;
    for (int q : ins.qubits) {
      if (q < 0 || q >= n_qubits) throw ValidationError("qubit index out of range" + where);
      if (!seen.insert(q).second) throw ValidationError("repeated qubit operand" + where);
    }
    for (int c : ins.clbits) {
      if (c < 0 || c >= n_clbits) throw ValidationError("clbit index out of range" + where);
    }
  }
}

Circuit& Circuit::append(const Instruction& instr) {
  instructions.push_back(instr);
  return *this;
}

Circuit& Circuit::append(const Circuit& other) {
  instructions.insert(instructions.end(), other.instructions.begin(), other.instructions.end());
  return *this;
}

Circuit& Circuit::u(int q, double theta, double phi, double lambda) {
  return append({GateKind::U, {q}, {}, {theta, phi, lambda}});
}
Circuit& Circuit::cx(int control, int target) { return append({GateKind::CX, {control, target}, {}, {}}); }
Circuit& Circuit::r(int q, double theta, double phi) { return append({GateKind::R, {q}, {}, {theta, phi}}); }
Circuit& Circuit::rx(int q, double theta) { return append({GateKind::RX, {q}, {}, {theta}}); }
Circuit& Circuit::ry(int q, double theta) { return append({GateKind::RY, {q}, {}, {theta}}); }
Circuit& Circuit::rz(int q, double theta) { return append({GateKind::RZ, {q}, {}, {theta}}); }
Circuit& Circuit::rxx(int q0, int q1, double theta) { return append({GateKind::RXX, {q0, q1}, {}, {theta}}); }
Circuit& Circuit::rzz(int q0, int q1, double theta) { return append({GateKind::RZZ, {q0, q1}, {}, {theta}}); }
Circuit& Circuit::measure(int q, int c) { return append({GateKind::Measure, {q}, {c}, {}}); }
Circuit& Circuit::barrier(std::vector<int> qubits) { return append({GateKind::Barrier, std::move(qubits), {}, {}}); }
Circuit& Circuit::reset(int q) { return append({GateKind::Reset, {q}, {}, {}}); }

Circuit& Circuit::measure_all() {
  if (n_clbits < n_qubits) n_clbits = n_qubits;
  for (int q = 0; q < n_qubits; ++q) measure(q, q);
  return *this;
}

Circuit Circuit::without_measurements() const {
  Circuit out(n_qubits, n_clbits);
  for (const auto& ins : instructions) {
    if (ins.kind != GateKind::Measure && ins.kind != GateKind::Barrier) out.instructions.push_back(ins);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { Ident, Number, String, Symbol, Arrow, End };

struct Token {
  Tok type = Tok::End;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) advance();
        t.type = Tok::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) advance();
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
          advance();
          if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        }
        t.type = Tok::Number;
        t.text = std::string(src_.substr(start, pos_ - start));
        auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
        if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size()) {
          throw ParseError("malformed number '" + t.text + "'", t.line, t.column);
        }
      } else if (c == '"') {
        advance();
        std::size_t start = pos_;
        while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') advance();
        if (pos_ >= src_.size() || src_[pos_] != '"') throw ParseError("unterminated string", t.line, t.column);
        t.type = Tok::String;
        t.text = std::string(src_.substr(start, pos_ - start));
        advance();
      } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
        advance();
        advance();
        t.type = Tok::Arrow;
        t.text = "->";
      } else if (std::string_view("[](),;+-*/^").find(c) != std::string_view::npos) {
        advance();
        t.type = Tok::Symbol;
        t.text = std::string(1, c);
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.column);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      if (std::isspace(static_cast<unsigned char>(src_[pos_]))) {
        advance();
      } else if (src_.substr(pos_, 2) == "//") {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// Gates accepted by name; qelib1 aliases are lowered onto U.
struct GateSyntax {
  std::string_view name;
  int params;
  int arity;
};

constexpr std::array<GateSyntax, 22> kGateSyntax{{
    {"u", 3, 1},  {"U", 3, 1},  {"u3", 3, 1}, {"u2", 2, 1},   {"u1", 1, 1},  {"cx", 0, 2},
    {"CX", 0, 2}, {"r", 2, 1},  {"rx", 1, 1}, {"ry", 1, 1},   {"rz", 1, 1},  {"rxx", 1, 2},
    {"rzz", 1, 2}, {"h", 0, 1}, {"x", 0, 1},  {"y", 0, 1},    {"z", 0, 1},   {"s", 0, 1},
    {"sdg", 0, 1}, {"t", 0, 1}, {"tdg", 0, 1}, {"id", 0, 1},
}};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Circuit run() {
    const Token& head = peek();
    if (!(head.type == Tok::Ident && head.text == "OPENQASM")) {
      throw ParseError("missing 'OPENQASM 2.0;' header", head.line, head.column);
    }
    next();
    const Token& ver = next();
    if (ver.type != Tok::Number || ver.text != "2.0") {
      throw ParseError("unsupported OpenQASM version '" + ver.text + "'", ver.line, ver.column);
    }
    expect_symbol(";");

    while (peek().type != Tok::End) statement();
    return circuit_;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const { throw ParseError(msg, t.line, t.column); }

  bool is_symbol(const char* s) const { return peek().type == Tok::Symbol && peek().text == s; }

  void expect_symbol(const char* s) {
    const Token& t = next();
    if (t.type != Tok::Symbol || t.text != s) {
      fail(t, std::string("expected '") + s + "' but found '" + (t.type == Tok::End ? "end of input" : t.text) + "'");
    }
  }

  std::string expect_ident() {
    const Token& t = next();
    if (t.type != Tok::Ident) fail(t, "expected identifier");
    return t.text;
  }

  int expect_int() {
    const Token& t = next();
    if (t.type != Tok::Number || t.text.find_first_not_of("0123456789") != std::string::npos) {
      fail(t, "expected non-negative integer");
    }
    return std::stoi(t.text);
  }

  void statement() {
    const Token& t = peek();
    if (t.type != Tok::Ident) fail(t, "expected statement");
    const std::string& word = t.text;
    if (word == "include") {
      next();
      const Token& file = next();
      if (file.type != Tok::String) fail(file, "expected include file name");
      if (file.text != "qelib1.inc") fail(file, "include of '" + file.text + "' is not supported");
      expect_symbol(";");
    } else if (word == "qreg" || word == "creg") {
      declare_register(word == "qreg");
    } else if (word == "measure") {
      measure_stmt();
    } else if (word == "barrier") {
      barrier_stmt();
    } else if (word == "reset") {
      next();
      auto qs = qubit_operand();
      expect_symbol(";");
      for (int q : qs) circuit_.reset(q);
    } else if (word == "gate" || word == "opaque" || word == "if") {
      fail(t, "'" + word + "' statements are not supported");
    } else {
      gate_stmt();
    }
  }

  void declare_register(bool quantum) {
    const Token& kw = next();
    std::string name = expect_ident();
    expect_symbol("[");
    const Token& size_tok = peek();
    int size = expect_int();
    expect_symbol("]");
    expect_symbol(";");
    if (size < 1) fail(size_tok, "register size must be positive");
    if (quantum) {
      if (!qreg_.empty()) fail(kw, "only a single qreg is supported");
      qreg_ = name;
      circuit_.n_qubits = size;
    } else {
      if (!creg_.empty()) fail(kw, "only a single creg is supported");
      creg_ = name;
      circuit_.n_clbits = size;
    }
  }

  // Parses `name` or `name[i]`; returns the list of addressed indices.
  std::vector<int> operand(bool quantum) {
    const Token& t = peek();
    std::string name = expect_ident();
    const std::string& reg = quantum ? qreg_ : creg_;
    const int size = quantum ? circuit_.n_qubits : circuit_.n_clbits;
    if (reg.empty() || name != reg) {
      fail(t, std::string("undeclared ") + (quantum ? "quantum" : "classical") + " register '" + name + "'");
    }
    if (is_symbol("[")) {
      next();
      const Token& idx_tok = peek();
      int idx = expect_int();
      expect_symbol("]");
      if (idx >= size) {
        fail(idx_tok, "index " + std::to_string(idx) + " overflows register '" + name + "' of size " + std::to_string(size));
      }
      return {idx};
    }
    std::vector<int> all(size);
    for (int i = 0; i < size; ++i) all[i] = i;
    return all;
  }

  std::vector<int> qubit_operand() { return operand(true); }

  void measure_stmt() {
    const Token& kw = next();
    auto qs = operand(true);
    const Token& arrow = next();
    if (arrow.type != Tok::Arrow) fail(arrow, "expected '->'");
    auto cs = operand(false);
    expect_symbol(";");
    if (qs.size() != cs.size()) fail(kw, "measure register sizes differ");
    for (std::size_t i = 0; i < qs.size(); ++i) circuit_.measure(qs[i], cs[i]);
  }

  void barrier_stmt() {
    next();
    std::vector<int> qs;
    for (;;) {
      auto part = operand(true);
      qs.insert(qs.end(), part.begin(), part.end());
      if (!is_symbol(",")) break;
      next();
    }
    expect_symbol(";");
    circuit_.barrier(std::move(qs));
  }

  void gate_stmt() {
    const Token& name_tok = next();
    const std::string name = name_tok.text;
    const GateSyntax* syn = nullptr;
    for (const auto& g : kGateSyntax) {
      if (g.name == name) syn = &g;
    }
    if (syn == nullptr) fail(name_tok, "unknown gate '" + name + "'");

    std::vector<double> params;
    if (is_symbol("(")) {
      next();
      if (!is_symbol(")")) {
        for (;;) {
          params.push_back(expression());
          if (!is_symbol(",")) break;
          next();
        }
      }
      expect_symbol(")");
    }
    if (static_cast<int>(params.size()) != syn->params) {
      fail(name_tok, "gate '" + name + "' expects " + std::to_string(syn->params) + " parameter(s), got " +
                         std::to_string(params.size()));
    }

    std::vector<std::vector<int>> args;
    if (peek().type == Tok::Symbol && peek().text == ";") fail(peek(), "gate '" + name + "' has no operands");
    for (;;) {
      args.push_back(operand(true));
      if (!is_symbol(",")) break;
      next();
    }
    expect_symbol(";");
    if (static_cast<int>(args.size()) != syn->arity) {
      fail(name_tok, "gate '" + name + "' expects " + std::to_string(syn->arity) + " qubit operand(s), got " +
                         std::to_string(args.size()));
    }

    // Register broadcast: whole-register operands must agree in length.
    std::size_t width = 1;
    for (const auto& a : args) {
      if (a.size() != 1) {
        if (width != 1 && width != a.size()) fail(name_tok, "register operand sizes differ");
        width = a.size();
      }
    }
    for (std::size_t k = 0; k < width; ++k) {
      std::vector<int> qs;
      for (const auto& a : args) qs.push_back(a.size() == 1 ? a[0] : a[k]);
      if (qs.size() == 2 && qs[0] == qs[1]) fail(name_tok, "gate '" + name + "' needs distinct qubits");
      emit_gate(name, params, qs);
    }
  }

  void emit_gate(const std::string& name, const std::vector<double>& p, const std::vector<int>& qs) {
    const int q = qs[0];
    if (name == "u" || name == "U" || name == "u3") {
      circuit_.u(q, p[0], p[1], p[2]);
    } else if (name == "u2") {
      circuit_.u(q, kPi / 2, p[0], p[1]);
    } else if (name == "u1") {
      circuit_.u(q, 0.0, 0.0, p[0]);
    } else if (name == "cx" || name == "CX") {
      circuit_.cx(qs[0], qs[1]);
    } else if (name == "r") {
      circuit_.r(q, p[0], p[1]);
    } else if (name == "rx") {
      circuit_.rx(q, p[0]);
    } else if (name == "ry") {
      circuit_.ry(q, p[0]);
    } else if (name == "rz") {
      circuit_.rz(q, p[0]);
    } else if (name == "rxx") {
      circuit_.rxx(qs[0], qs[1], p[0]);
    } else if (name == "rzz") {
      circuit_.rzz(qs[0], qs[1], p[0]);
    } else if (name == "h") {
      circuit_.h(q);
    } else if (name == "x") {
      circuit_.x(q);
    } else if (name == "y") {
      circuit_.u(q, kPi, kPi / 2, kPi / 2);
    } else if (name == "z") {
      circuit_.phase(q, kPi);
    } else if (name == "s") {
      circuit_.phase(q, kPi / 2);
    } else if (name == "sdg") {
      circuit_.phase(q, -kPi / 2);
    } else if (name == "t") {
      circuit_.phase(q, kPi / 4);
    } else if (name == "tdg") {
      circuit_.phase(q, -kPi / 4);
    } else if (name == "id") {
      circuit_.u(q, 0.0, 0.0, 0.0);
    }
  }

  // expression := term (('+'|'-') term)*
  double expression() {
    double v = term();
    while (is_symbol("+") || is_symbol("-")) {
      const bool plus = next().text == "+";
      const double rhs = term();
      v = plus ? v + rhs : v - rhs;
    }
    return v;
  }

  double term() {
    double v = power();
    while (is_symbol("*") || is_symbol("/")) {
      const Token& op = next();
      const double rhs = power();
      if (op.text == "*") {
        v *= rhs;
      } else {
        if (rhs == 0.0) fail(op, "division by zero");
        v /= rhs;
      }
    }
    return v;
  }

  double power() {
    double base = unary();
    if (is_symbol("^")) {
      next();
      return std::pow(base, power());
    }
    return base;
  }

  double unary() {
    if (is_symbol("-")) {
      next();
      return -unary();
    }
    if (is_symbol("+")) {
      next();
      return unary();
    }
    return primary();
  }

  double primary() {
    const Token& t = next();
    if (t.type == Tok::Number) return t.number;
    if (t.type == Tok::Symbol && t.text == "(") {
      double v = expression();
      expect_symbol(")");
      return v;
    }
    if (t.type == Tok::Ident) {
      if (t.text == "pi") return kPi;
      using Fn = double (*)(double);
      static const std::array<std::pair<std::string_view, Fn>, 6> fns{{
          {"sin", [](double x) { return std::sin(x); }},
          {"cos", [](double x) { return std::cos(x); }},
          {"tan", [](double x) { return std::tan(x); }},
          {"exp", [](double x) { return std::exp(x); }},
          {"ln", [](double x) { return std::log(x); }},
          {"sqrt", [](double x) { return std::sqrt(x); }},
      }};
      for (const auto& [fname, fn] : fns) {
        if (t.text == fname) {
          expect_symbol("(");
          double v = expression();
          expect_symbol(")");
          return fn(v);
        }
      }
      fail(t, "unknown identifier '" + t.text + "' in expression");
    }
    fail(t, "expected expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Circuit circuit_;
  std::string qreg_;
  std::string creg_;
};

std::string format_angle(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Circuit parse_qasm(std::string_view text) {
  Lexer lexer(text);
  Parser parser(lexer.run());
  Circuit c = parser.run();
  c.validate();
  return c;
}

std::string emit_qasm(const Circuit& circuit) {
  std::ostringstream os;
  os << "OPENQASM 2.0;\n";
  if (circuit.n_qubits > 0) os << "qreg q[" << circuit.n_qubits << "];\n";
  if (circuit.n_clbits > 0) os << "creg c[" << circuit.n_clbits << "];\n";
  for (const auto& ins : circuit.instructions) {
    os << kind_name(ins.kind);
    if (!ins.params.empty()) {
      os << '(';
      for (std::size_t i = 0; i < ins.params.size(); ++i) os << (i ? "," : "") << format_angle(ins.params[i]);
      os << ')';
    }
    os << ' ';
    for (std::size_t i = 0; i < ins.qubits.size(); ++i) os << (i ? "," : "") << "q[" << ins.qubits[i] << ']';
    if (ins.kind == GateKind::Measure) os << " -> c[" << ins.clbits[0] << ']';
    os << ";\n";
  }
  return os.str();
}

}  // namespace qemul
