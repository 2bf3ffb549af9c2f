#pragma once

// Stage machinery shared verbatim by the construction and the decoder: the
// mixture d, metered evaluation of d against an oracle, the evaluation sets,
// the cut point t, and segment selection. Both sides call exactly these
// functions in the same order, which is what makes the decoder's replay
// reproduce the construction's t values.

#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "crlab/bit_source.hpp"
#include "crlab/bitstring.hpp"
#include "crlab/kernels.hpp"
#include "crlab/mdsl.hpp"
#include "crlab/rational.hpp"

namespace crlab {

enum class EvalSetMode { kFull, kPrefix };

std::string to_string(EvalSetMode mode);
EvalSetMode parse_eval_set_mode(const std::string& text);

struct Candidate {
  std::string name;
  mdsl::Program program;
};

// Segment length at stage s.
constexpr std::size_t segment_length(std::size_t s) { return s + 2; }

// Length of beta after stage s: 2 * sum_{i=0..s} (i + 2) = (s + 1)(s + 4).
constexpr std::size_t stage_end(std::size_t s) { return (s + 1) * (s + 4); }

// 2^-s.
Rational stage_epsilon(std::size_t s);

// d = 1 + sum of coefficient * candidate, candidates by 0-based index.
struct Mixture {
  struct Term {
    std::size_t candidate;
    Rational coefficient;
    friend bool operator==(const Term&, const Term&) = default;
  };
  std::vector<Term> terms;

  std::string describe(const std::vector<Candidate>& candidates) const;
  friend bool operator==(const Mixture&, const Mixture&) = default;
};

// A successful metered evaluation.
struct Metered {
  Rational value;
  std::uint64_t steps = 0;
  std::uint64_t use = 0;

  // Contribution to the cut point: max(steps, use + 1) when the oracle was
  // read, so that every bit the computation depends on lies strictly before
  // the cut.
  std::uint64_t cut() const { return use == 0 ? steps : std::max(steps, use + 1); }
};

struct MeterFailure {
  enum class Kind { kDiverged, kOracleRange, kFault };
  Kind kind;
  std::size_t candidate;  // 0-based
  BitString input;
  std::uint64_t index = 0;  // oracle position for kOracleRange
  std::string message;
};

using Metering = std::variant<Metered, MeterFailure>;

// Outcomes of candidate programs keyed by (candidate, input). An entry is
// reused for another oracle only if that oracle agrees on every position up
// to the recorded use, which by determinism reproduces the outcome exactly.
class OutcomeCache {
 public:
  std::optional<mdsl::EvalOutcome> find(std::size_t candidate, const BitString& z,
                                        const BitSource& oracle) const;
  void store(std::size_t candidate, const BitString& z, const BitSource& oracle,
             const mdsl::EvalOutcome& outcome);
  std::size_t size() const;

 private:
  struct Entry {
    BitString reads;
    mdsl::EvalOutcome outcome;
  };
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::vector<Entry>> entries_;
};

// Evaluates candidates and mixtures against one oracle.
class StageEvaluator {
 public:
  StageEvaluator(std::shared_ptr<const std::vector<Candidate>> candidates,
                 BitSource oracle, std::uint64_t budget,
                 std::shared_ptr<OutcomeCache> cache);

  Metering component(std::size_t candidate, const BitString& z) const;

  // steps = 1 (the constant base) + sum of component steps; use = max.
  Metering mixture(const Mixture& m, const BitString& z) const;

  const std::vector<Candidate>& candidates() const { return *candidates_; }
  const BitSource& oracle() const { return oracle_; }
  std::uint64_t budget() const { return budget_; }

 private:
  std::shared_ptr<const std::vector<Candidate>> candidates_;
  BitSource oracle_;
  std::uint64_t budget_;
  std::shared_ptr<OutcomeCache> cache_;
};

// Strings on which d is evaluated to determine t at stage s.
//   full:   all strings of length <= stage_end(s);
//   prefix: the proper prefixes of beta_start, then every extension of
//           beta_start of length <= stage_end(s).
std::vector<BitString> evaluation_set(const BitString& beta_start, std::size_t s,
                                      EvalSetMode mode);

// Internal nodes of the evaluation set (both children also in the set).
std::vector<BitString> evaluation_tree_nodes(const BitString& beta_start,
                                             std::size_t s, EvalSetMode mode);

// Result of opening stage s: the (possibly) updated mixture.
struct StageOpening {
  Mixture mixture;
  bool mixed = false;
  Rational coefficient = 0;
  std::optional<Rational> probe_value;  // d_s(beta) when d_s was probed
  std::uint64_t probe_cut = 0;
};

// If candidate_total, probes d_s(beta) (candidate index s - 1) and mixes
// d := d + (2^-s / d_s(beta)) d_s when the probe is positive.
std::variant<StageOpening, MeterFailure> open_stage(const StageEvaluator& ev,
                                                    const Mixture& current,
                                                    const BitString& beta,
                                                    std::size_t s,
                                                    bool candidate_total);

struct Inconsistent {
  std::string message;
};

using PairResult =
    std::variant<std::pair<BitString, BitString>, MeterFailure, Inconsistent>;

// First and second safe segments of length s + 2 after beta for the mixture.
PairResult select_pair(const StageEvaluator& ev, const Mixture& mixture,
                       const BitString& beta, std::size_t s);

struct CutResult {
  std::uint64_t t_raw = 0;
  std::uint64_t t = 0;
  std::vector<BitString> points;
  std::vector<Metered> values;  // parallel to points
};

// t_raw = max(probe_cut, max over the evaluation set of Metered::cut());
// t = max(t_raw, t_prev + 1). The first failure (in set order) is reported.
std::variant<CutResult, MeterFailure> stage_cut(
    const StageEvaluator& ev, const Mixture& mixture,
    const BitString& beta_start, std::size_t s, EvalSetMode mode,
    std::uint64_t probe_cut, std::uint64_t t_prev,
    kernels::Execution exec = kernels::Execution::kParallel);

// Serial reference used by the kernel tests and benchmarks.
std::variant<CutResult, MeterFailure> stage_cut_serial(
    const StageEvaluator& ev, const Mixture& mixture,
    const BitString& beta_start, std::size_t s, EvalSetMode mode,
    std::uint64_t probe_cut, std::uint64_t t_prev);

std::string describe(const MeterFailure& f,
                     const std::vector<Candidate>& candidates);

}  // namespace crlab
