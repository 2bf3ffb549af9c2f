#include <gtest/gtest.h>

#include <sstream>

#include "crlab/checks.hpp"
#include "crlab/martingale.hpp"

namespace crlab {
namespace {

// Table of the given depth from a value function over heap-ordered strings.
Martingale table_of(std::size_t depth, Rational (*f)(const BitString&)) {
  std::vector<Rational> values;
  for (const auto& x : strings_up_to(depth)) values.push_back(f(x));
  return Martingale::table(depth, std::move(values));
}

// One bet: 1 at the root, 2 on "0", 0 on "1", flat afterwards.
Rational one_step_doubling(const BitString& x) {
  if (x.empty()) return 1;
  return x.at(1) == 0 ? 2 : 0;
}

// Repeated: 2^n on 0^n, 0 once a 1 appears.
Rational repeated_doubling(const BitString& x) {
  for (std::size_t k = 1; k <= x.size(); ++k) {
    if (x.at(k) == 1) return 0;
  }
  return pow2(static_cast<long>(x.size()));
}

TEST(FairnessTest, ConstantPasses) {
  EXPECT_TRUE(validate_fairness(Martingale::constant(1), 6).passed());
}

TEST(FairnessTest, OneStepDoublingPasses) {
  auto m = table_of(1, one_step_doubling);
  EXPECT_TRUE(validate_fairness(m, 3).passed());
  // Beyond its depth the table stops betting.
  EXPECT_EQ(m(BitString::parse("011")), 2);
  EXPECT_EQ(m(BitString::parse("1000")), 0);
}

TEST(FairnessTest, UnfairRootIsReported) {
  auto m = Martingale::table(1, {1, 2, 1});
  auto r = validate_fairness(m, 3);
  EXPECT_EQ(r.status, FairnessReport::Status::kUnfair);
  EXPECT_EQ(r.node, BitString());
}

TEST(FairnessTest, NegativeValueIsReported) {
  auto m = Martingale::table(1, {0, 1, -1});
  auto r = validate_fairness(m, 2);
  EXPECT_EQ(r.status, FairnessReport::Status::kNegative);
}

TEST(FairnessTest, EvaluationFailureNamesTheString) {
  auto p = mdsl::parse("(if (< (len) 2) 1 (diverge))");
  auto m = fix_oracle(p, BitSource::explicit_bits(BitString()), 1000);
  auto r = validate_fairness(m, 3);
  EXPECT_EQ(r.status, FairnessReport::Status::kEvaluationFailed);
  EXPECT_EQ(r.node.size(), 2u);
}

TEST(MixTest, ConstantPlusHalfConstant) {
  auto d = mix(Martingale::constant(1), Martingale::constant(1), Rational(1, 2));
  for (const auto& x : strings_up_to(4)) EXPECT_EQ(d(x), Rational(3, 2));
}

TEST(MixTest, ZeroCoefficientIsIdentity) {
  auto f = checks::random_fair_table(11, 6);
  auto d = mix(f, Martingale::constant(5), 0);
  for (const auto& x : strings_up_to(6)) EXPECT_EQ(d(x), f(x));
}

TEST(MixTest, PointwiseSumWithDoubling) {
  auto d = mix(Martingale::constant(1), table_of(4, repeated_doubling), Rational(1, 2));
  EXPECT_EQ(d(BitString::parse("0")), 2);
  EXPECT_EQ(d(BitString::parse("00")), 3);
  EXPECT_EQ(d(BitString::parse("1")), 1);
  EXPECT_TRUE(validate_fairness(d, 6).passed());
}

TEST(MixTest, NestedMixturesFlatten) {
  auto a = mix(Martingale::constant(1), Martingale::constant(1), 1);
  auto b = mix(a, Martingale::constant(2), Rational(1, 4));
  EXPECT_EQ(b(BitString()), Rational(5, 2));
}

TEST(SavingsTest, DoublingPathZeroZero) {
  auto f = table_of(4, repeated_doubling);
  auto saved = savings_transform(f);
  EXPECT_EQ(saved(BitString()), 2);
  EXPECT_EQ(saved(BitString::parse("0")), 3);
  EXPECT_EQ(saved(BitString::parse("00")), 4);
  EXPECT_EQ(savings_state(f, BitString::parse("00")).banked, 3);
  EXPECT_EQ(savings_state(f, BitString::parse("00")).active, 1);
}

TEST(SavingsTest, DoublingPathOneHitsTheHalvingBoundary) {
  auto f = table_of(4, repeated_doubling);
  auto saved = savings_transform(f);
  EXPECT_EQ(saved(BitString::parse("1")), 1);
  EXPECT_EQ(2 * saved(BitString::parse("1")), saved(BitString()));
  // f is 0 below "1"; the ratio convention keeps the savings flat there.
  EXPECT_EQ(saved(BitString::parse("101")), 1);
}

TEST(SavingsTest, ConstantNeverBanks) {
  auto f = Martingale::constant(1);
  auto saved = savings_transform(f);
  for (const auto& x : strings_up_to(5)) {
    EXPECT_EQ(saved(x), 2);
    auto st = savings_state(f, x);
    EXPECT_EQ(st.banked, 1);
    EXPECT_EQ(st.active, 1);
  }
}

TEST(SavingsTest, NormalizesTheRoot) {
  auto f = Martingale::constant(7);
  EXPECT_EQ(savings_transform(f)(BitString::parse("0101")), 2);
  EXPECT_THROW(savings_transform(Martingale::constant(0)), RangeError);
}

TEST(SavingsTest, RandomTablesKeepAllGuarantees) {
  auto r = checks::savings_properties(5, 10, 8);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(DecomposeTest, ConstantSplitsIntoOnes) {
  auto [odd, even] = decompose_odd_even(Martingale::constant(1), 5);
  for (const auto& x : strings_up_to(5)) {
    EXPECT_EQ(odd(x), 1);
    EXPECT_EQ(even(x), 1);
  }
}

TEST(DecomposeTest, OddOnlyStrategyHasTrivialEvenFactor) {
  auto f = table_of(1, one_step_doubling);
  auto [odd, even] = decompose_odd_even(f, 6);
  for (const auto& x : strings_up_to(6)) {
    EXPECT_EQ(even(x), 1) << x;
    EXPECT_EQ(odd(x), f(x)) << x;
  }
}

TEST(DecomposeTest, ProductRecoversRandomTable) {
  auto f = checks::random_fair_table(42, 6);
  auto [odd, even] = decompose_odd_even(f, 6);
  for (const auto& x : strings_up_to(6)) EXPECT_EQ(odd(x) * even(x), f(x)) << x;
}

TEST(DecomposeTest, ZeroBranchesStayZero) {
  auto f = table_of(4, repeated_doubling);
  auto [odd, even] = decompose_odd_even(f, 4);
  for (const auto& x : strings_up_to(4)) {
    EXPECT_EQ(odd(x) * even(x), f(x)) << x;
  }
  EXPECT_TRUE(validate_fairness(odd, 4).passed());
  EXPECT_TRUE(validate_fairness(even, 4).passed());
}

TEST(FixOracleTest, ConstantProgram) {
  auto m = fix_oracle(mdsl::parse("(const 1)"), BitSource::seeded(1), 100);
  for (const auto& x : strings_up_to(3)) EXPECT_EQ(m(x), 1);
}

TEST(FixOracleTest, BetOnOracleBit) {
  auto p = mdsl::parse("(if (= (len) 0) 1 (if (= (bit 1) (oracle 1)) 2 0))");
  auto m = fix_oracle(p, BitSource::explicit_bits(BitString::parse("1011")), 1000);
  EXPECT_EQ(m(BitString::parse("1")), 2);
  EXPECT_EQ(m(BitString::parse("0")), 0);
  auto outcome = m.outcome(BitString::parse("1"));
  ASSERT_TRUE(outcome.has_value());
  EXPECT_EQ(outcome->oracle_use, 1u);
}

TEST(FixOracleTest, DivergenceSurfacesAsEvaluationError) {
  auto m = fix_oracle(mdsl::parse("(if (< (len) 2) 1 (diverge))"),
                      BitSource::seeded(1), 1000);
  EXPECT_EQ(m(BitString::parse("1")), 1);
  try {
    m(BitString::parse("00"));
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_EQ(e.input(), "00");
  }
}

TEST(TableIoTest, RoundTrip) {
  auto f = checks::random_fair_table(3, 4);
  std::stringstream buf;
  write_table(buf, f, 4);
  auto g = read_table(buf);
  for (const auto& x : strings_up_to(6)) EXPECT_EQ(g(x), f(x)) << x;
  EXPECT_EQ(g.table_depth(), 4u);
}

TEST(TableIoTest, RejectsUnfairAndIncomplete) {
  std::stringstream unfair("- 1/1\n0 2/1\n1 1/1\n");
  EXPECT_THROW(read_table(unfair), FormatError);
  std::stringstream missing("- 1/1\n0 1/1\n");
  EXPECT_THROW(read_table(missing), FormatError);
  std::stringstream garbage("- one\n");
  EXPECT_THROW(read_table(garbage), FormatError);
  std::stringstream ok("# comment\n- 1/1\n0 2/1\n1 0/1\n");
  EXPECT_EQ(read_table(ok)(BitString::parse("0")), 2);
}

TEST(TabulateTest, MatchesPointwiseEvaluation) {
  auto f = checks::random_fair_table(9, 5);
  auto values = tabulate(f, 5);
  auto all = strings_up_to(5);
  ASSERT_EQ(values.size(), all.size());
  for (std::size_t k = 0; k < all.size(); ++k) EXPECT_EQ(values[k], f(all[k]));
}

TEST(RandomTableTest, GeneratorIsDeterministicAndFair) {
  auto a = checks::random_fair_table(77, 8);
  auto b = checks::random_fair_table(77, 8);
  for (const auto& x : strings_up_to(8)) ASSERT_EQ(a(x), b(x));
  EXPECT_TRUE(validate_fairness(a, 8).passed());
  auto bad = checks::random_fair_table(77, 8, checks::Fault::kUnfairTables);
  EXPECT_FALSE(validate_fairness(bad, 8).passed());
}

}  // namespace
}  // namespace crlab
