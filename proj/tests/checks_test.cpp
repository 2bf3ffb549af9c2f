#include <gtest/gtest.h>

#include "crlab/checks.hpp"

namespace crlab::checks {
namespace {

TEST(ChecksTest, EveryTableCheckCatchesTheInjectedFault) {
  const auto fault = Fault::kUnfairTables;
  for (const auto& r : {safe_extension_counts(1, 3, 6, 2, fault),
                        univariate_round_trip(1, 3, 6, 3, fault),
                        savings_properties(1, 3, 6, fault),
                        decomposition_product(1, 3, 6, fault),
                        bivariate_halving(1, 2, 2, fault)}) {
    EXPECT_FALSE(r.passed) << r.name;
    EXPECT_NE(r.detail.find("not a martingale"), std::string::npos) << r.detail;
  }
}

TEST(ChecksTest, SmallRunsPass) {
  for (const auto& r : {safe_extension_counts(1, 5, 6, 3), univariate_round_trip(1, 3, 6, 3),
                        savings_properties(1, 3, 6), decomposition_product(1, 3, 6)}) {
    EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
  }
}

TEST(ChecksTest, ESquaredBoundIsBelowESquared) {
  auto bound = e_squared_lower_bound();
  // e^2 = 7.389056...
  EXPECT_GT(bound, Rational(7389, 1000));
  EXPECT_LT(bound, Rational(7390, 1000));
}

TEST(ChecksTest, ConstructionChecksOnStageZero) {
  auto sc = builtin_scenario("stage0");
  auto r = run_construction(sc);
  EXPECT_TRUE(construction_invariants(sc, r).passed);
  EXPECT_TRUE(dominance(sc, r, 4).passed);
  EXPECT_TRUE(decoder_end_to_end(sc, r).passed);
}

TEST(ChecksTest, TamperedRunIsRejected) {
  auto sc = builtin_scenario("stage0");
  auto r = run_construction(sc);
  auto wrong_value = r;
  wrong_value.traces[0].d_at_beta = 2;
  auto result = construction_invariants(sc, wrong_value);
  EXPECT_FALSE(result.passed);
  EXPECT_NE(result.detail.find("disagrees"), std::string::npos) << result.detail;
  auto short_beta = r;
  short_beta.beta = BitString::parse("010");
  EXPECT_FALSE(construction_invariants(sc, short_beta).passed);
}

TEST(ChecksTest, UnknownBuiltinIsAnError) {
  EXPECT_THROW(builtin_scenario("huge"), RangeError);
}

TEST(ChecksTest, QuickSuiteFailsOnlyTheTableChecksUnderFault) {
  SuiteOptions options;
  options.quick = true;
  options.fault = Fault::kUnfairTables;
  std::size_t reported = 0;
  auto results = run_suite(options, builtin_scenario("stage0"),
                           [&](const CheckResult&) { ++reported; });
  EXPECT_EQ(reported, results.size());
  for (const auto& r : results) {
    bool table_check = r.name == "safe extension counts" ||
                       r.name == "univariate round trip" || r.name == "savings transform" ||
                       r.name == "odd/even decomposition" ||
                       r.name == "bivariate savings halving";
    EXPECT_EQ(r.passed, !table_check) << r.name << ": " << r.detail;
  }
}

}  // namespace
}  // namespace crlab::checks
