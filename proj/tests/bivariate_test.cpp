#include <gtest/gtest.h>

#include "crlab/bivariate.hpp"
#include "crlab/checks.hpp"

namespace crlab {
namespace {

BitString bs(const char* s) { return BitString::parse(s); }

Rational repeated_doubling(const BitString& x) {
  for (std::size_t k = 1; k <= x.size(); ++k) {
    if (x.at(k) == 1) return 0;
  }
  return pow2(static_cast<long>(x.size()));
}

Martingale doubling_table(std::size_t depth) {
  std::vector<Rational> values;
  for (const auto& x : strings_up_to(depth)) values.push_back(repeated_doubling(x));
  return Martingale::table(depth, std::move(values));
}

TEST(BivariateTest, ConstantPasses) {
  auto g = BivariateMartingale::from_function(
      [](const BitString&, const BitString&) { return Rational(1); }, "one");
  EXPECT_TRUE(validate_bivariate(g, 4, 4).passed());
}

TEST(BivariateTest, ProductOfFairMartingalesPasses) {
  auto g = BivariateMartingale::product(checks::random_fair_table(1, 4),
                                        checks::random_fair_table(2, 4));
  EXPECT_TRUE(validate_bivariate(g, 5, 5).passed());
}

TEST(BivariateTest, UnfairSectionsAreDistinguished) {
  // Fair in y (constant), unfair in x at the root.
  auto gx = BivariateMartingale::from_function(
      [](const BitString& x, const BitString&) {
        return x.empty() ? Rational(1) : Rational(3);
      },
      "bad-x");
  auto rx = validate_bivariate(gx, 2, 2);
  EXPECT_EQ(rx.status, BivariateReport::Status::kUnfairInX);
  EXPECT_EQ(rx.x, BitString());

  auto gy = BivariateMartingale::from_function(
      [](const BitString&, const BitString& y) {
        return y.size() == 2 && y.at(2) == 1 ? Rational(5) : Rational(1);
      },
      "bad-y");
  auto ry = validate_bivariate(gy, 2, 2);
  EXPECT_EQ(ry.status, BivariateReport::Status::kUnfairInY);
  EXPECT_EQ(ry.y.size(), 1u);
}

TEST(BivariateTest, TableClampsBeyondDepth) {
  // g(x, y) = 2 on (0, anything), 0 on (1, anything), 1 at the root row.
  std::vector<std::vector<Rational>> values(3, std::vector<Rational>(3));
  for (std::size_t hy = 0; hy < 3; ++hy) {
    values[0][hy] = 1;
    values[1][hy] = 2;
    values[2][hy] = 0;
  }
  auto g = BivariateMartingale::table(1, 1, values);
  EXPECT_EQ(g(bs("011"), bs("10101")), 2);
  EXPECT_TRUE(validate_bivariate(g, 3, 3).passed());
}

TEST(FromUnivariateTest, EqualLengthsInterleave) {
  auto f = checks::random_fair_table(5, 8);
  auto g = from_univariate(f);
  EXPECT_EQ(g(bs("01"), bs("10")), f(bs("0110")));
  EXPECT_EQ(g(BitString(), BitString()), f(BitString()));
}

TEST(FromUnivariateTest, ShorterArgumentIsAveraged) {
  auto f = checks::random_fair_table(6, 8);
  auto g = from_univariate(f);
  EXPECT_EQ(g(bs("0"), bs("10")), (f(bs("0100")) + f(bs("0110"))) / 2);
  // Two missing bits of x: the average over all four completions.
  Rational sum = 0;
  for (const char* x : {"100", "101", "110", "111"}) {
    sum += f(interleave(bs(x), bs("011")));
  }
  EXPECT_EQ(g(bs("1"), bs("011")), sum / 4);
  // y shorter than x.
  EXPECT_EQ(g(bs("11"), bs("0")), (f(bs("1010")) + f(bs("1011"))) / 2);
}

TEST(FromUnivariateTest, PassesOnRectangle) {
  auto g = from_univariate(checks::random_fair_table(8, 10));
  EXPECT_TRUE(validate_bivariate(g, 5, 5).passed());
}

TEST(ToUnivariateTest, CasesOfTheSplit) {
  auto f = checks::random_fair_table(12, 8);
  auto g = from_univariate(f);
  auto back = to_univariate(g);
  EXPECT_EQ(back(bs("0110")), g(bs("01"), bs("10")));
  EXPECT_EQ(back(bs("011")), g(bs("01"), bs("1")));
  EXPECT_EQ(back(BitString()), g(BitString(), BitString()));
  for (const auto& z : strings_up_to(8)) EXPECT_EQ(back(z), f(z)) << z;
}

TEST(ToUnivariateTest, UnboundednessTransfersOnEqualLengthPairs) {
  auto f = checks::random_fair_table(21, 10);
  auto g = from_univariate(f);
  for (const auto& z : strings_of_length(10)) {
    Rational best_pair = 0, best_prefix = 0;
    for (std::size_t n = 0; n <= 10; n += 2) {
      auto [x, y] = split(z.prefix(n));
      best_pair = std::max(best_pair, g(x, y));
      best_prefix = std::max(best_prefix, f(z.prefix(n)));
    }
    EXPECT_EQ(best_pair, best_prefix) << z;
  }
}

TEST(BivariateSavingsTest, ConstantBecomesTwo) {
  auto g = BivariateMartingale::from_function(
      [](const BitString&, const BitString&) { return Rational(1); }, "one");
  auto saved = bivariate_savings(g);
  for (const auto& x : strings_up_to(3)) {
    for (const auto& y : strings_up_to(3)) EXPECT_EQ(saved(x, y), 2);
  }
}

// Every single-coordinate or joint one-bit step stays above half.
void expect_rectangle_halving(const BivariateMartingale& saved, std::size_t depth) {
  auto xs = strings_up_to(depth);
  for (const auto& x : xs) {
    for (const auto& y : xs) {
      Rational here = saved(x, y);
      for (int v : {0, 1}) {
        if (x.size() < depth) EXPECT_GE(2 * saved(x.with(v), y), here) << x << "," << y;
        if (y.size() < depth) EXPECT_GE(2 * saved(x, y.with(v)), here) << x << "," << y;
        for (int w : {0, 1}) {
          if (x.size() < depth && y.size() < depth) {
            EXPECT_GE(2 * saved(x.with(v), y.with(w)), here) << x << "," << y;
          }
        }
      }
    }
  }
}

TEST(BivariateSavingsTest, HalvingOnOneStepDoublingRectangle) {
  auto f = Martingale::table(1, {1, 2, 0});
  auto saved = bivariate_savings(from_univariate(f));
  EXPECT_TRUE(validate_bivariate(saved, 5, 5).passed());
  expect_rectangle_halving(saved, 5);
}

TEST(BivariateSavingsTest, RepeatedDoublingBreaksHalvingOffTheDiagonal) {
  // Averaging over the missing bit of x mixes a winning and a losing branch:
  // g'(empty, 0) = (f'(00) + f'(10)) / 2 = 5/2 but g'(1, 0) = f'(10) = 1.
  auto saved = bivariate_savings(from_univariate(doubling_table(10)));
  EXPECT_TRUE(validate_bivariate(saved, 5, 5).passed());
  EXPECT_EQ(saved(BitString(), bs("0")), Rational(5, 2));
  EXPECT_EQ(saved(bs("1"), bs("0")), 1);
  // Along equal-length chains the guarantee still holds.
  for (std::size_t n = 0; n < 5; ++n) {
    for (const auto& x : strings_of_length(n)) {
      for (const auto& y : strings_of_length(n)) {
        for (int v : {0, 1}) {
          for (int w : {0, 1}) {
            EXPECT_GE(2 * saved(x.with(v), y.with(w)), saved(x, y));
          }
        }
      }
    }
  }
}

TEST(BivariateSavingsTest, SuiteReportsOffDiagonalCounts) {
  auto r = checks::bivariate_halving(3, 2, 3);
  EXPECT_TRUE(r.passed) << r.detail;
  EXPECT_NE(r.detail.find("reported only"), std::string::npos);
}

TEST(BivariateSavingsTest, EqualLengthChainHalving) {
  auto saved = bivariate_savings(from_univariate(checks::random_fair_table(31, 8)));
  for (std::size_t n = 0; n < 4; ++n) {
    for (const auto& x : strings_of_length(n)) {
      for (const auto& y : strings_of_length(n)) {
        Rational here = saved(x, y);
        for (int v : {0, 1}) {
          for (int w : {0, 1}) {
            EXPECT_GE(2 * saved(x.with(v), y.with(w)), here);
          }
        }
      }
    }
  }
}

TEST(BivariateSavingsTest, ZeroRootIsRejected) {
  auto g = BivariateMartingale::from_function(
      [](const BitString&, const BitString&) { return Rational(0); }, "zero");
  EXPECT_THROW(bivariate_savings(g), RangeError);
}

}  // namespace
}  // namespace crlab
