#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "crlab/bitstring.hpp"
#include "crlab/martingale.hpp"
#include "crlab/rational.hpp"

namespace crlab {

namespace detail {
class BivariateImpl {
 public:
  virtual ~BivariateImpl() = default;
  virtual Rational eval(const BitString& x, const BitString& y) const = 0;
  virtual std::string describe() const = 0;
};
}  // namespace detail

// A map from pairs of bit strings to non-negative rationals that is a
// martingale in each argument separately.
class BivariateMartingale {
 public:
  // Values on the rectangle |x| <= depth_x, |y| <= depth_y, indexed
  // values[heap_index(x)][heap_index(y)]. Each coordinate stops betting beyond
  // its depth.
  static BivariateMartingale table(std::size_t depth_x, std::size_t depth_y,
                                   std::vector<std::vector<Rational>> values);

  static BivariateMartingale product(Martingale f, Martingale h);

  static BivariateMartingale from_function(
      std::function<Rational(const BitString&, const BitString&)> fn,
      std::string description);

  Rational eval(const BitString& x, const BitString& y) const {
    return impl_->eval(x, y);
  }
  Rational operator()(const BitString& x, const BitString& y) const {
    return impl_->eval(x, y);
  }
  std::string describe() const { return impl_->describe(); }

  explicit BivariateMartingale(std::shared_ptr<const detail::BivariateImpl> impl)
      : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<const detail::BivariateImpl> impl_;
};

struct BivariateReport {
  enum class Status { kPass, kUnfairInX, kUnfairInY, kNegative, kEvaluationFailed };
  Status status = Status::kPass;
  BitString x, y;
  std::string message;
  bool passed() const { return status == Status::kPass; }
};

// Checks both section-fairness identities and non-negativity on the
// rectangle |x| <= depth_x, |y| <= depth_y.
BivariateReport validate_bivariate(const BivariateMartingale& g,
                                   std::size_t depth_x, std::size_t depth_y);

// g(x, y) = f(interleave(x, y)) when |x| == |y|; otherwise the shorter
// argument is averaged over all its extensions to the longer length.
// Exponential in the length difference; memoized.
BivariateMartingale from_univariate(const Martingale& f);

// f(z) = g(split(z)).
Martingale to_univariate(const BivariateMartingale& g);

// from_univariate(savings_transform(to_univariate(g))).
BivariateMartingale bivariate_savings(const BivariateMartingale& g);

}  // namespace crlab
