#pragma once

// The martingale DSL: a small s-expression language for rational-valued,
// oracle-querying betting strategies, with a metered interpreter. See
// docs/mdsl.md for the grammar and cost model.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crlab/bit_source.hpp"
#include "crlab/bitstring.hpp"
#include "crlab/error.hpp"
#include "crlab/rational.hpp"

namespace crlab::mdsl {

enum class Op {
  kLiteral,
  kLen,
  kBit,
  kOracle,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kMin,
  kMax,
  kEq,
  kLt,
  kLe,
  kGt,
  kGe,
  kNot,
  kAnd,
  kOr,
  kIf,
  kFold,
  kLoop,
  kAcc,
  kPos,
  kDiverge,
};

struct Node {
  Op op = Op::kLiteral;
  Rational value;  // kLiteral only
  std::vector<Node> args;

  friend bool operator==(const Node& a, const Node& b) {
    return a.op == b.op && a.value == b.value && a.args == b.args;
  }
};

class ParseError : public FormatError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : FormatError(std::to_string(line) + ":" + std::to_string(column) +
                    ": " + what),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

// An immutable program. Copies share the tree.
class Program {
 public:
  Program() : root_(std::make_shared<const Node>()) {}
  explicit Program(Node root)
      : root_(std::make_shared<const Node>(std::move(root))) {}

  const Node& root() const { return *root_; }
  std::size_t node_count() const;

  friend bool operator==(const Program& a, const Program& b) {
    return a.root_ == b.root_ || *a.root_ == *b.root_;
  }

 private:
  std::shared_ptr<const Node> root_;
};

Program parse(std::string_view text);

// Canonical single-line form; parse(print(p)) == p.
std::string print(const Program& p);
std::string print(const Node& n);

struct Value {
  Rational value;
  friend bool operator==(const Value&, const Value&) = default;
};
struct Diverged {
  friend bool operator==(const Diverged&, const Diverged&) = default;
};
struct OracleOutOfRange {
  std::uint64_t index;
  friend bool operator==(const OracleOutOfRange&,
                         const OracleOutOfRange&) = default;
};
// Runtime faults: division by zero, negative result, bad index, ...
struct Fault {
  std::string message;
  friend bool operator==(const Fault&, const Fault&) = default;
};

using Result = std::variant<Value, Diverged, OracleOutOfRange, Fault>;

struct EvalOutcome {
  Result result;
  std::uint64_t steps = 0;
  // Largest 1-based oracle position that was answered; 0 if none.
  std::uint64_t oracle_use = 0;

  bool ok() const { return std::holds_alternative<Value>(result); }
  const Rational& value() const { return std::get<Value>(result).value; }
  std::string describe() const;

  friend bool operator==(const EvalOutcome&, const EvalOutcome&) = default;
};

// Big-step evaluation on input x with the given oracle. Every node
// evaluation event costs one step; exceeding `budget` steps, or reaching
// (diverge), yields Diverged with steps == budget.
EvalOutcome evaluate(const Program& p, const BitString& x,
                     const BitSource& oracle, std::uint64_t budget);

struct ProgramCheck {
  bool passed = true;
  std::string message;
  BitString witness;
};

// Evaluates p on every string of length <= depth and checks convergence,
// non-negativity and exact fairness.
ProgramCheck check_program_martingale(const Program& p, const BitSource& oracle,
                                      std::size_t depth, std::uint64_t budget);

}  // namespace crlab::mdsl
