#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crlab/bit_source.hpp"
#include "crlab/bitstring.hpp"
#include "crlab/mdsl.hpp"
#include "crlab/rational.hpp"

namespace crlab {

namespace detail {
class MartingaleImpl {
 public:
  virtual ~MartingaleImpl() = default;
  virtual Rational eval(const BitString& x) const = 0;
  virtual std::string describe() const = 0;
};
}  // namespace detail

// A total map from bit strings to non-negative rationals that is meant to
// satisfy f(x0) + f(x1) = 2 f(x). Constructors do not verify fairness; use
// validate_fairness. Copies share the underlying representation, which is
// immutable, so a Martingale may be evaluated concurrently.
//
// eval throws EvaluationError when the value cannot be computed (for
// program-backed martingales: divergence, oracle out of range, faults).
class Martingale {
 public:
  static Martingale constant(Rational value);

  // Values on all strings of length <= depth in heap order (see heap_index).
  // Beyond depth the table stops betting: f(xv) = f(x) for |x| = depth.
  static Martingale table(std::size_t depth, std::vector<Rational> values);

  // f(x) = sum of coefficient * component(x).
  static Martingale sum(std::vector<std::pair<Rational, Martingale>> terms);

  // Backed by a DSL program with a fixed oracle; results are memoized per
  // input and the memo is invisible to callers.
  static Martingale program(mdsl::Program p, BitSource oracle,
                            std::uint64_t budget, std::string name = "program");

  static Martingale from_function(std::function<Rational(const BitString&)> fn,
                                  std::string description);

  Rational eval(const BitString& x) const { return impl_->eval(x); }
  Rational operator()(const BitString& x) const { return impl_->eval(x); }
  std::string describe() const { return impl_->describe(); }

  // For program-backed martingales, the full metered outcome; nullopt for
  // every other representation.
  std::optional<mdsl::EvalOutcome> outcome(const BitString& x) const;

  // The table depth for table-backed martingales.
  std::optional<std::size_t> table_depth() const;

  explicit Martingale(std::shared_ptr<const detail::MartingaleImpl> impl)
      : impl_(std::move(impl)) {}
  const detail::MartingaleImpl& impl() const { return *impl_; }

 private:
  std::shared_ptr<const detail::MartingaleImpl> impl_;
};

struct FairnessReport {
  enum class Status { kPass, kUnfair, kNegative, kEvaluationFailed };
  Status status = Status::kPass;
  BitString node;  // first violating node (heap order)
  std::string message;

  bool passed() const { return status == Status::kPass; }
};

// Checks fairness at every node of length < depth and non-negativity at every
// node of length <= depth, exactly.
FairnessReport validate_fairness(const Martingale& m, std::size_t depth);

// Values of m on strings_up_to(depth), heap order; parallel over nodes.
std::vector<Rational> tabulate(const Martingale& m, std::size_t depth);

// d + coefficient * component. Flattens nested sums.
Martingale mix(const Martingale& d, const Martingale& component,
               const Rational& coefficient);

// Banked/active split of the savings-transformed martingale at a node.
struct SavingsState {
  Rational banked;  // s: non-decreasing along extensions, starts at 1
  Rational active;  // a: in [0, 1] after banking, starts at 1
  Rational value() const { return banked + active; }
};

// The savings transform. Starting from (s, a) = (1, 1) at the root, along each
// edge a is multiplied by f(xb)/f(x) (ratio 1 when f(x) = 0); then if a > 1
// the excess a - 1 is moved into s. The result f' = s + a is fair, starts at
// 2, never drops below half of any earlier value, and f' <= 2s.
// Throws RangeError if f(empty) == 0.
Martingale savings_transform(const Martingale& f);

// Walks the path to x and returns the savings state there.
SavingsState savings_state(const Martingale& f, const BitString& x);

// Product decomposition: f_odd bets only at odd positions, f_even only at even
// positions, and f_odd * f_even == f on every string of length <= depth.
// f(empty) is carried by f_odd; once f hits 0 both factors stop betting.
// Both factors are materialized as tables of the given depth.
std::pair<Martingale, Martingale> decompose_odd_even(const Martingale& f,
                                                     std::size_t depth);

// Evaluates p on all strings through the metered interpreter.
Martingale fix_oracle(const mdsl::Program& p, const BitSource& oracle,
                      std::uint64_t budget);

// Table text format: one line "<bits> <num>/<den>" per string of length
// <= depth, with the empty string written as "-". '#' starts a comment.
// read_table validates completeness, non-negativity and fairness.
void write_table(std::ostream& os, const Martingale& m, std::size_t depth);
Martingale read_table(std::istream& is);

}  // namespace crlab
