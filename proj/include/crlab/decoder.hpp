#pragma once

// The bivariate martingale e that wins on (alpha, beta). It replays the
// construction from its second argument alone, learns which candidates are
// total from the segments of beta, recomputes each stage's cut point t using
// its first argument as the oracle, and doubles its capital on the decoded
// bit at every position t.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crlab/bivariate.hpp"
#include "crlab/bitstring.hpp"
#include "crlab/construction.hpp"
#include "crlab/rational.hpp"
#include "crlab/stage.hpp"

namespace crlab {

class DecodeError : public Error {
 public:
  using Error::Error;
};

// Everything e may know: the public candidate programs, the evaluation-set
// mode and the step budget. Never any totality flag. Holds memo caches that
// are shared by copies and invisible in results.
class DecoderContext {
 public:
  DecoderContext(std::vector<Candidate> candidates, EvalSetMode mode,
                 std::uint64_t budget);
  static DecoderContext from_scenario(const Scenario& sc);

  const std::vector<Candidate>& candidates() const { return *candidates_; }
  EvalSetMode mode() const { return mode_; }
  std::uint64_t budget() const { return budget_; }

  struct Caches;
  Caches& caches() const { return *caches_; }
  std::shared_ptr<const std::vector<Candidate>> shared_candidates() const {
    return candidates_;
  }

 private:
  std::shared_ptr<const std::vector<Candidate>> candidates_;
  EvalSetMode mode_;
  std::uint64_t budget_;
  std::shared_ptr<Caches> caches_;
};

// e(a, b). For b too short to finish the replay, the value is the average
// over all extensions of b, computed lazily: only the two valid choices of an
// unread segment are explored and every other choice freezes.
Rational eval_e(const BitString& a, const BitString& b, const DecoderContext& ctx);

BivariateMartingale decoder_martingale(const DecoderContext& ctx);

struct ReplayStage {
  enum class Status {
    kBet,          // t <= |a| and both segments valid
    kMalformed,    // a segment is neither the first nor the second safe string
    kStopped,      // t > |a|, oracle read past |a|, or divergence
    kIncomplete,   // b ended inside this stage
  };
  std::size_t s = 0;
  Status status = Status::kIncomplete;
  BitString totality_segment;
  std::pair<BitString, BitString> expected_totality;
  std::optional<bool> decoded_total;  // totality of candidate s + 1
  std::optional<std::uint64_t> t;
  BitString alpha_segment;
  std::pair<BitString, BitString> expected_alpha;
  std::optional<int> expected_bit;
  std::size_t consumed = 0;  // |b| consumed after this stage
  std::string note;
};

// Replays the stages on b itself (no averaging) until b runs out or the
// replay stops.
std::vector<ReplayStage> replay(const BitString& a, const BitString& b,
                                const DecoderContext& ctx);

// Decoded totality flags of candidates 1..k, one per completed totality
// segment of beta. Throws DecodeError on a malformed segment (naming the
// stage and both expected strings) or when alpha_prefix is too short to
// replay all of beta.
std::vector<bool> decode_totality(const BitString& beta, const DecoderContext& ctx,
                                  const BitString& alpha_prefix);

// (n, e(alpha_prefix[1..n], beta)) for n = 0..|alpha_prefix|.
std::vector<std::pair<std::size_t, Rational>> capital_trace(
    const BitString& alpha_prefix, const BitString& beta, const DecoderContext& ctx);

// Shortest alpha prefix, doubling from 64 bits, that lets the replay consume
// all of beta; the whole source if it runs out first.
BitString alpha_for_replay(const Scenario& sc, const BitString& beta,
                           const DecoderContext& ctx);
void write_replay_csv(std::ostream& os, const std::vector<ReplayStage>& stages);
void write_capital_csv(std::ostream& os, const BitString& alpha,
                       const std::vector<std::pair<std::size_t, Rational>>& trace);
struct DecodeSummary {
  std::vector<bool> flags;
  Rational final_capital;
};
// Writes replay.csv and capital.csv into `dir`. With alpha_length 0 the alpha
// prefix is found by alpha_for_replay and cut at the last bet position.
// Throws DecodeError when beta does not decode.
DecodeSummary write_decode(const Scenario& sc, const BitString& beta,
                           std::uint64_t alpha_length, const std::filesystem::path& dir);
std::string to_string(ReplayStage::Status status);

}  // namespace crlab
