#include "crlab/mdsl.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <sstream>

#include "crlab/kernels.hpp"

namespace crlab::mdsl {
namespace {

struct OpInfo {
  std::string_view name;
  Op op;
  int arity;
};

constexpr std::array<OpInfo, 23> kOps = {{
    {"len", Op::kLen, 0},       {"bit", Op::kBit, 1},
    {"oracle", Op::kOracle, 1}, {"add", Op::kAdd, 2},
    {"sub", Op::kSub, 2},       {"mul", Op::kMul, 2},
    {"div", Op::kDiv, 2},       {"min", Op::kMin, 2},
    {"max", Op::kMax, 2},       {"=", Op::kEq, 2},
    {"<", Op::kLt, 2},          {"<=", Op::kLe, 2},
    {">", Op::kGt, 2},          {">=", Op::kGe, 2},
    {"not", Op::kNot, 1},       {"and", Op::kAnd, 2},
    {"or", Op::kOr, 2},         {"if", Op::kIf, 3},
    {"fold", Op::kFold, 2},     {"loop", Op::kLoop, 3},
    {"acc", Op::kAcc, 0},       {"pos", Op::kPos, 0},
    {"diverge", Op::kDiverge, 0},
}};

const OpInfo* find_op(std::string_view name) {
  for (const auto& info : kOps) {
    if (info.name == name) return &info;
  }
  return nullptr;
}

std::string_view op_name(Op op) {
  for (const auto& info : kOps) {
    if (info.op == op) return info.name;
  }
  return "?";
}

struct Token {
  enum Kind { kOpen, kClose, kAtom, kEnd } kind;
  std::string text;
  std::size_t line, column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_blank();
    if (i_ >= text_.size()) return {Token::kEnd, "", line_, col_};
    std::size_t line = line_, col = col_;
    char c = text_[i_];
    if (c == '(' || c == ')') {
      advance();
      return {c == '(' ? Token::kOpen : Token::kClose, std::string(1, c), line,
              col};
    }
    std::size_t start = i_;
    while (i_ < text_.size() && !is_delim(text_[i_])) advance();
    return {Token::kAtom, std::string(text_.substr(start, i_ - start)), line,
            col};
  }

 private:
  static bool is_delim(char c) {
    return c == '(' || c == ')' || c == ';' ||
           std::isspace(static_cast<unsigned char>(c));
  }
  void advance() {
    if (text_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }
  void skip_blank() {
    while (i_ < text_.size()) {
      char c = text_[i_];
      if (c == ';') {
        while (i_ < text_.size() && text_[i_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t i_ = 0, line_ = 1, col_ = 1;
};

bool looks_numeric(std::string_view atom) {
  if (atom.empty()) return false;
  char c = atom.front();
  if (c == '-' && atom.size() > 1) c = atom[1];
  return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { shift(); }

  Node parse_program() {
    Node n = parse_expr();
    if (tok_.kind != Token::kEnd) fail(tok_, "trailing input after program");
    return n;
  }

 private:
  [[noreturn]] static void fail(const Token& t, const std::string& what) {
    throw ParseError(t.line, t.column, what);
  }
  void shift() { tok_ = lexer_.next(); }

  Node literal(const Token& t) {
    try {
      Node n;
      n.op = Op::kLiteral;
      n.value = parse_rational(t.text);
      return n;
    } catch (const FormatError&) {
      fail(t, "non-rational literal '" + t.text + "'");
    }
  }

  Node parse_expr() {
    Token t = tok_;
    switch (t.kind) {
      case Token::kEnd:
        fail(t, "unexpected end of input");
      case Token::kClose:
        fail(t, "unexpected ')'");
      case Token::kAtom:
        shift();
        if (looks_numeric(t.text)) return literal(t);
        if (find_op(t.text) || t.text == "const") {
          fail(t, "operator '" + t.text + "' must be applied in parentheses");
        }
        fail(t, "unknown atom '" + t.text + "'");
      case Token::kOpen:
        break;
    }
    shift();
    Token head = tok_;
    if (head.kind != Token::kAtom) fail(head, "expected an operator name");
    shift();
    if (head.text == "const") {
      Token arg = tok_;
      if (arg.kind != Token::kAtom) fail(arg, "const expects a rational literal");
      shift();
      Node n = literal(arg);
      expect_close(head);
      return n;
    }
    const OpInfo* info = find_op(head.text);
    if (!info) fail(head, "unknown operator '" + head.text + "'");
    if ((info->op == Op::kAcc || info->op == Op::kPos) && binders_ == 0) {
      fail(head, "'" + head.text + "' used outside fold/loop");
    }
    Node n;
    n.op = info->op;
    for (int k = 0; k < info->arity; ++k) {
      if (tok_.kind == Token::kClose || tok_.kind == Token::kEnd) {
        fail(tok_, "'" + head.text + "' expects " +
                       std::to_string(info->arity) + " argument(s)");
      }
      // The body of fold and the cond/step of loop see acc and pos.
      bool binds = (info->op == Op::kFold && k == 1) ||
                   (info->op == Op::kLoop && k >= 1);
      binders_ += binds;
      n.args.push_back(parse_expr());
      binders_ -= binds;
    }
    expect_close(head);
    return n;
  }

  void expect_close(const Token& head) {
    if (tok_.kind == Token::kEnd) fail(tok_, "missing ')' for '" + head.text + "'");
    if (tok_.kind != Token::kClose) {
      fail(tok_, "too many arguments to '" + head.text + "'");
    }
    shift();
  }

  Lexer lexer_;
  Token tok_{Token::kEnd, "", 1, 1};
  int binders_ = 0;
};

// ---------------------------------------------------------------------------

struct DivergeSignal {};
struct OracleSignal {
  std::uint64_t index;
};
struct FaultSignal {
  std::string message;
};

class Machine {
 public:
  Machine(const BitString& x, const BitSource& oracle, std::uint64_t budget)
      : x_(x), oracle_(oracle), budget_(budget) {}

  std::uint64_t steps() const { return steps_; }
  std::uint64_t use() const { return use_; }

  Rational eval(const Node& n) {
    tick();
    switch (n.op) {
      case Op::kLiteral:
        return n.value;
      case Op::kLen:
        return Rational(static_cast<unsigned long>(x_.size()));
      case Op::kBit: {
        auto k = index(eval(n.args[0]), "bit");
        if (k > x_.size()) {
          throw FaultSignal{"input position " + std::to_string(k) +
                            " outside 1.." + std::to_string(x_.size())};
        }
        return x_.at(k);
      }
      case Op::kOracle: {
        auto k = index(eval(n.args[0]), "oracle");
        auto b = oracle_.try_bit(k);
        if (!b) throw OracleSignal{k};
        use_ = std::max(use_, k);
        return *b;
      }
      case Op::kAdd:
      case Op::kSub:
      case Op::kMul:
      case Op::kDiv:
      case Op::kMin:
      case Op::kMax:
      case Op::kEq:
      case Op::kLt:
      case Op::kLe:
      case Op::kGt:
      case Op::kGe: {
        // Operands are evaluated left to right.
        Rational a = eval(n.args[0]);
        Rational b = eval(n.args[1]);
        return binary(n.op, a, b);
      }
      case Op::kNot:
        return truth(eval(n.args[0]) == 0);
      case Op::kAnd:
        return truth(eval(n.args[0]) != 0 && eval(n.args[1]) != 0);
      case Op::kOr:
        return truth(eval(n.args[0]) != 0 || eval(n.args[1]) != 0);
      case Op::kIf:
        return eval(n.args[0]) != 0 ? eval(n.args[1]) : eval(n.args[2]);
      case Op::kFold: {
        Rational acc = eval(n.args[0]);
        for (std::size_t k = 1; k <= x_.size(); ++k) {
          frames_.push_back({acc, k});
          acc = eval(n.args[1]);
          frames_.pop_back();
        }
        return acc;
      }
      case Op::kLoop: {
        Rational v = eval(n.args[0]);
        for (std::uint64_t iter = 1;; ++iter) {
          frames_.push_back({v, iter});
          bool go = eval(n.args[1]) != 0;
          if (go) v = eval(n.args[2]);
          frames_.pop_back();
          if (!go) return v;
        }
      }
      case Op::kAcc:
        return frames_.back().acc;
      case Op::kPos:
        return Rational(static_cast<unsigned long>(frames_.back().pos));
      case Op::kDiverge:
        steps_ = budget_;
        throw DivergeSignal{};
    }
    throw FaultSignal{"unknown node"};
  }

 private:
  struct Frame {
    Rational acc;
    std::uint64_t pos;
  };

  void tick() {
    if (steps_ >= budget_) throw DivergeSignal{};
    ++steps_;
  }

  static Rational truth(bool b) { return b ? 1 : 0; }

  static Rational binary(Op op, const Rational& a, const Rational& b) {
    switch (op) {
      case Op::kAdd:
        return a + b;
      case Op::kSub:
        return a - b;
      case Op::kMul:
        return a * b;
      case Op::kDiv:
        if (b == 0) throw FaultSignal{"division by zero"};
        return a / b;
      case Op::kMin:
        return a < b ? a : b;
      case Op::kMax:
        return a < b ? b : a;
      case Op::kEq:
        return truth(a == b);
      case Op::kLt:
        return truth(a < b);
      case Op::kLe:
        return truth(a <= b);
      case Op::kGt:
        return truth(a > b);
      default:
        return truth(a >= b);
    }
  }

  static std::uint64_t index(const Rational& v, const char* what) {
    if (v.get_den() != 1 || v < 1 || !v.get_num().fits_ulong_p()) {
      throw FaultSignal{std::string(what) + " index " + to_string(v) +
                        " is not a positive integer"};
    }
    return v.get_num().get_ui();
  }

  const BitString& x_;
  const BitSource& oracle_;
  std::uint64_t budget_;
  std::uint64_t steps_ = 0;
  std::uint64_t use_ = 0;
  std::vector<Frame> frames_;
};

std::size_t count_nodes(const Node& n) {
  std::size_t c = 1;
  for (const auto& a : n.args) c += count_nodes(a);
  return c;
}

}  // namespace

std::size_t Program::node_count() const { return count_nodes(*root_); }

Program parse(std::string_view text) {
  return Program(Parser(text).parse_program());
}

std::string print(const Node& n) {
  if (n.op == Op::kLiteral) {
    return n.value.get_den() == 1 ? n.value.get_num().get_str()
                                  : n.value.get_str();
  }
  std::string out = "(";
  out += op_name(n.op);
  for (const auto& a : n.args) {
    out += ' ';
    out += print(a);
  }
  out += ')';
  return out;
}

std::string print(const Program& p) { return print(p.root()); }

std::string EvalOutcome::describe() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Value>) {
          os << "value " << to_string(r.value);
        } else if constexpr (std::is_same_v<T, Diverged>) {
          os << "diverged";
        } else if constexpr (std::is_same_v<T, OracleOutOfRange>) {
          os << "oracle_out_of_range " << r.index;
        } else {
          os << "fault " << r.message;
        }
      },
      result);
  os << " steps " << steps << " use " << oracle_use;
  return os.str();
}

EvalOutcome evaluate(const Program& p, const BitString& x,
                     const BitSource& oracle, std::uint64_t budget) {
  Machine m(x, oracle, budget);
  EvalOutcome out;
  try {
    Rational v = m.eval(p.root());
    if (v < 0) {
      out.result = Fault{"negative result " + to_string(v)};
    } else {
      out.result = Value{std::move(v)};
    }
  } catch (const DivergeSignal&) {
    out.result = Diverged{};
  } catch (const OracleSignal& s) {
    out.result = OracleOutOfRange{s.index};
  } catch (const FaultSignal& f) {
    out.result = Fault{f.message};
  }
  out.steps = m.steps();
  out.oracle_use = m.use();
  return out;
}

ProgramCheck check_program_martingale(const Program& p, const BitSource& oracle,
                                      std::size_t depth, std::uint64_t budget) {
  auto points = strings_up_to(depth);
  auto outcomes = kernels::map(
      std::span<const BitString>(points),
      [&](const BitString& x) { return evaluate(p, x, oracle, budget); });
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!outcomes[i].ok()) {
      return {false, "evaluation at \"" + points[i].str() + "\" gave " +
                         outcomes[i].describe(),
              points[i]};
    }
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() >= depth) break;
    const Rational& parent = outcomes[i].value();
    const Rational& c0 = outcomes[heap_index(points[i].with(0))].value();
    const Rational& c1 = outcomes[heap_index(points[i].with(1))].value();
    if (c0 + c1 != 2 * parent) {
      return {false,
              "unfair at \"" + points[i].str() + "\": " + to_string(c0) + " + " +
                  to_string(c1) + " != 2*" + to_string(parent),
              points[i]};
    }
  }
  return {};
}

}  // namespace crlab::mdsl
