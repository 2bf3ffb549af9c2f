#include <gtest/gtest.h>

#include "crlab/checks.hpp"
#include "crlab/decoder.hpp"
#include "literal_decoder.hpp"

namespace crlab {
namespace {

BitString bs(const char* s) { return BitString::parse(s); }

Scenario with_flags_flipped(Scenario sc) {
  for (auto& c : sc.candidates) c.declared_total = !c.declared_total;
  return sc;
}

TEST(DecoderTest, EmptyFirstArgumentIsOne) {
  auto ctx = DecoderContext::from_scenario(checks::builtin_scenario("tiny"));
  for (const auto& b : strings_up_to(6)) EXPECT_EQ(eval_e(BitString(), b, ctx), 1) << b;
  EXPECT_EQ(eval_e(BitString(), bs("0101010101010101"), ctx), 1);
}

TEST(DecoderTest, StageZeroExample) {
  auto ctx = DecoderContext::from_scenario(checks::builtin_scenario("stage0"));
  EXPECT_EQ(eval_e(bs("1"), bs("0101"), ctx), 2);
  EXPECT_EQ(eval_e(bs("0"), bs("0101"), ctx), 0);
  // Later positions carry no further bets for a one-stage beta prefix.
  EXPECT_EQ(eval_e(bs("10"), bs("0101"), ctx), 2);
}

TEST(DecoderTest, StageZeroDecodingAndTrace) {
  auto sc = checks::builtin_scenario("stage0");
  auto ctx = DecoderContext::from_scenario(sc);
  EXPECT_EQ(decode_totality(bs("0101"), ctx, bs("10")), std::vector<bool>{true});
  auto trace = capital_trace(bs("10"), bs("0101"), ctx);
  ASSERT_EQ(trace.size(), 3u);
  EXPECT_EQ(trace[0].second, 1);
  EXPECT_EQ(trace[1].second, 2);
  EXPECT_EQ(trace.back().second, 2);
}

TEST(DecoderTest, TamperedTotalitySegmentIsReported) {
  auto ctx = DecoderContext::from_scenario(checks::builtin_scenario("stage0"));
  try {
    decode_totality(bs("1101"), ctx, bs("10"));
    FAIL() << "expected DecodeError";
  } catch (const DecodeError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("stage 0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("\"00\""), std::string::npos) << msg;
    EXPECT_NE(msg.find("\"01\""), std::string::npos) << msg;
  }
  auto stages = replay(bs("1"), bs("1101"), ctx);
  ASSERT_FALSE(stages.empty());
  EXPECT_EQ(stages[0].status, ReplayStage::Status::kMalformed);
}

TEST(DecoderTest, GarbageSegmentFreezes) {
  auto sc = checks::builtin_scenario("tiny");
  auto ctx = DecoderContext::from_scenario(sc);
  auto r = run_construction(sc);
  // Valid stage 0, then a stage-1 totality segment that is not safe-first or
  // safe-second for a constant mixture (those are 000 and 001).
  BitString b = r.beta.prefix(4).concat(bs("111")).concat(bs("000000000000"));
  const int bit0 = sc.alpha.bit(1);
  for (const auto& a : strings_up_to(6)) {
    if (a.empty()) continue;
    Rational expected = a.at(1) == bit0 ? 2 : 0;
    EXPECT_EQ(eval_e(a, b, ctx), expected) << a;
  }
  auto stages = replay(sc.alpha.prefix(6), b, ctx);
  ASSERT_EQ(stages.size(), 2u);
  EXPECT_EQ(stages[1].status, ReplayStage::Status::kMalformed);
}

TEST(DecoderTest, ReplayMatchesConstruction) {
  auto sc = checks::builtin_scenario("tiny");
  auto r = run_construction(sc);
  auto ctx = DecoderContext::from_scenario(sc);
  auto stages = replay(sc.alpha.prefix(8), r.beta, ctx);
  ASSERT_EQ(stages.size(), r.traces.size());
  for (std::size_t s = 0; s < stages.size(); ++s) {
    EXPECT_EQ(stages[s].status, ReplayStage::Status::kBet);
    EXPECT_EQ(stages[s].t, r.traces[s].t);
    EXPECT_EQ(stages[s].expected_bit, r.traces[s].alpha_bit);
    EXPECT_EQ(stages[s].decoded_total, r.traces[s].encoded_total);
    EXPECT_EQ(stages[s].consumed, stage_end(s));
  }
  EXPECT_EQ(r.traces[0].t, 1u);
  EXPECT_EQ(r.traces[1].t, 2u);
  EXPECT_EQ(r.traces[2].t, 3u);
  EXPECT_EQ(decode_totality(r.beta, ctx, sc.alpha.prefix(8)),
            (std::vector<bool>{true, false, true}));
}

TEST(DecoderTest, ShortAlphaStopsTheReplay) {
  auto sc = checks::builtin_scenario("tiny");
  auto r = run_construction(sc);
  auto ctx = DecoderContext::from_scenario(sc);
  auto stages = replay(sc.alpha.prefix(2), r.beta, ctx);
  ASSERT_EQ(stages.size(), 3u);
  EXPECT_EQ(stages[2].status, ReplayStage::Status::kStopped);
  EXPECT_THROW(decode_totality(r.beta, ctx, sc.alpha.prefix(2)), DecodeError);
  auto cut_short = replay(sc.alpha.prefix(8), r.beta.prefix(7), ctx);
  EXPECT_EQ(cut_short.back().status, ReplayStage::Status::kIncomplete);
}

TEST(DecoderTest, S3EndToEnd) {
  auto sc = checks::builtin_scenario("s3");
  auto r = run_construction(sc);
  auto result = checks::decoder_end_to_end(sc, r);
  EXPECT_TRUE(result.passed) << result.detail;
  auto ctx = DecoderContext::from_scenario(sc);
  auto flags = decode_totality(r.beta, ctx, sc.alpha.prefix(r.traces.back().t));
  EXPECT_EQ(flags, (std::vector<bool>{true, false, true, true}));
}

TEST(DecoderTest, FlagsAreNotAnInput) {
  auto sc = checks::builtin_scenario("tiny");
  auto ctx = DecoderContext::from_scenario(sc);
  auto flipped = DecoderContext::from_scenario(with_flags_flipped(sc));
  auto beta = run_construction(sc).beta;
  for (const auto& a : strings_up_to(3)) {
    for (const auto& b : {beta, beta.prefix(9), bs("0000"), bs("0100000")}) {
      EXPECT_EQ(eval_e(a, b, ctx), eval_e(a, b, flipped)) << a << "," << b;
    }
  }
}

TEST(DecoderTest, AveragesOverShortSecondArgument) {
  auto sc = checks::builtin_scenario("tiny");
  auto ctx = DecoderContext::from_scenario(sc);
  for (const auto& a : strings_up_to(2)) {
    for (const auto& b : strings_up_to(5)) {
      EXPECT_EQ(eval_e(a, b, ctx), (eval_e(a, b.with(0), ctx) + eval_e(a, b.with(1), ctx)) / 2)
          << a << "," << b;
    }
  }
}

TEST(DecoderFairnessTest, OracleReadingCandidate) {
  auto sc = parse_scenario(R"j({"format": "crlab-scenario/1",
    "alpha": {"kind": "seeded", "seed": 5, "length": 64},
    "candidates": [{"name": "peek", "program": "(if (= (oracle 3) 1) 1 1)", "total": true}],
    "stages": 1, "eval_set": "prefix", "step_budget": 1000})j");
  auto ctx = DecoderContext::from_scenario(sc);
  auto report = validate_bivariate(decoder_martingale(ctx), 5, 10);
  EXPECT_TRUE(report.passed()) << report.message;
}

TEST(DecoderFairnessTest, TinyRectangleSmall) {
  auto ctx = DecoderContext::from_scenario(checks::builtin_scenario("tiny"));
  auto report = validate_bivariate(decoder_martingale(ctx), 2, 10);
  EXPECT_TRUE(report.passed()) << report.message;
}

TEST(LiteralOracleTest, AgreesOnTinyRectangle) {
  auto ctx = DecoderContext::from_scenario(checks::builtin_scenario("tiny"));
  testing::LiteralDecoder literal(ctx);
  for (const auto& a : strings_up_to(2)) {
    for (const auto& b : strings_up_to(12)) {
      ASSERT_EQ(eval_e(a, b, ctx), literal.e(a, b)) << a << "," << b;
    }
  }
}

TEST(LiteralOracleTest, AgreesAlongTheConstructedPair) {
  auto sc = checks::builtin_scenario("tiny");
  auto r = run_construction(sc);
  auto ctx = DecoderContext::from_scenario(sc);
  testing::LiteralDecoder literal(ctx);
  for (std::size_t n = 0; n <= 3; ++n) {
    auto a = sc.alpha.prefix(n);
    EXPECT_EQ(eval_e(a, r.beta, ctx), literal.e(a, r.beta)) << n;
    EXPECT_EQ(literal.e(a, r.beta), pow2(static_cast<long>(n)));
  }
}

}  // namespace
}  // namespace crlab
