#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "crlab/bit_source.hpp"
#include "crlab/bitstring.hpp"
#include "crlab/martingale.hpp"
#include "crlab/mdsl.hpp"
#include "crlab/rational.hpp"
#include "crlab/stage.hpp"

namespace crlab {

// Malformed or inconsistent scenario: a declared-total candidate that
// diverges, faults or is unfair on a string the run needs.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

// The alpha source ended before a position the run needs.
class AlphaTooShortError : public ScenarioError {
 public:
  explicit AlphaTooShortError(std::uint64_t required)
      : ScenarioError("alpha source too short: lengthen it to at least " +
                      std::to_string(required) + " bits"),
        required_(required) {}
  std::uint64_t required() const { return required_; }

 private:
  std::uint64_t required_;
};

struct ScenarioCandidate {
  std::string name;
  mdsl::Program program;
  bool declared_total = false;
};

inline constexpr const char* kScenarioFormat = "crlab-scenario/1";

struct Scenario {
  BitSource alpha = BitSource::explicit_bits(BitString());
  std::vector<ScenarioCandidate> candidates;
  std::size_t stages = 0;  // stages run s = 0..stages
  EvalSetMode eval_set = EvalSetMode::kPrefix;
  std::uint64_t step_budget = 100000;
  std::string alpha_json;  // the alpha object as written, for echoing

  std::vector<Candidate> public_candidates() const;
};

// JSON scenario schema (docs/scenario.md). Throws FormatError.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& sc);

// Structural checks plus check_program_martingale on every declared-total
// candidate up to `depth`. Returns one message per problem.
std::vector<std::string> validate_scenario(const Scenario& sc, std::size_t depth);

struct StageTrace {
  std::size_t s = 0;
  bool mixed = false;
  Rational coefficient = 0;
  std::optional<Rational> probe_value;
  BitString totality_segment;
  BitString alpha_segment;
  bool encoded_total = false;  // declared totality of candidate s + 1
  std::uint64_t t_raw = 0;
  std::uint64_t t = 0;
  int alpha_bit = 0;
  Rational d_at_beta;       // d(beta) after the stage
  Rational running_bound;   // (1 + sum of mixed eps) * prod (1 + eps)^2
  Mixture mixture;          // d during the stage
  std::size_t beta_start = 0;  // |beta| when the stage began
  std::size_t evaluations = 0;
};

struct ConstructionResult {
  BitString beta;
  std::vector<StageTrace> traces;
  Mixture mixture;     // final d
  Martingale final_d = Martingale::constant(1);  // d as a martingale over alpha
  std::vector<BitString> evaluated;  // union of the evaluation sets
};

struct ConstructionOptions {
  // Declared-total candidates are checked up front on all strings of length
  // <= min(validate_depth, |beta|).
  std::size_t validate_depth = 8;
  kernels::Execution exec = kernels::Execution::kParallel;
};

ConstructionResult run_construction(const Scenario& sc,
                                    const ConstructionOptions& options = {});

// d as a martingale: const(1) plus each term as a program-backed martingale
// over the given oracle.
Martingale mixture_martingale(const Mixture& m,
                              const std::vector<Candidate>& candidates,
                              const BitSource& oracle, std::uint64_t budget);

// Writes beta.txt, trace.csv and mixture.txt into `dir` (created if needed).
void write_construction(const ConstructionResult& r, const Scenario& sc,
                        const std::filesystem::path& dir);
void write_trace_csv(std::ostream& os, const ConstructionResult& r);

}  // namespace crlab
