#pragma once

// The property suite behind `crlab check` and the acceptance binary. Every
// check is exact and deterministic given its seed.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "crlab/construction.hpp"
#include "crlab/kernels.hpp"
#include "crlab/martingale.hpp"

namespace crlab::checks {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

// Fault injection for the negative control: the table generator returns
// martingales whose root split is off by 1/4.
enum class Fault { kNone, kUnfairTables };

// A table martingale of the given depth with root value 1 where every node
// splits its capital v into v*k/4 and v*(8-k)/4 with k drawn from 0..8, so
// zero-capital branches occur.
Martingale random_fair_table(std::uint64_t seed, std::size_t depth,
                             Fault fault = Fault::kNone);

// Safe-extension counts: for `tables` random tables of the given depth and
// every (x, i) with |x| + i + 2 <= depth, i <= max_i and d(x) > 0, at least
// two safe extensions exist.
CheckResult safe_extension_counts(std::uint64_t seed, std::size_t tables = 200,
                                  std::size_t depth = 8, std::size_t max_i = 5,
                                  Fault fault = Fault::kNone);

// to_univariate(from_univariate(f)) == f up to `depth`, and from_univariate(f)
// is fair on the rect x rect rectangle.
CheckResult univariate_round_trip(std::uint64_t seed, std::size_t count = 50,
                                  std::size_t depth = 10, std::size_t rect = 6,
                                  Fault fault = Fault::kNone);

// Savings transform: fair, never drops below half of the parent, banked part
// non-decreasing, and f' <= 2s everywhere.
CheckResult savings_properties(std::uint64_t seed, std::size_t count = 50,
                               std::size_t depth = 10, Fault fault = Fault::kNone);

// bivariate_savings(from_univariate(f)) on the rect x rect rectangle: halving
// along equal-length chains is required; single-coordinate steps that drop
// below half are counted and reported in the detail without failing.
CheckResult bivariate_halving(std::uint64_t seed, std::size_t count = 10,
                              std::size_t rect = 4, Fault fault = Fault::kNone);
// f_odd * f_even == f on all strings up to depth and both factors fair.
CheckResult decomposition_product(std::uint64_t seed, std::size_t count = 50,
                                  std::size_t depth = 8, Fault fault = Fault::kNone);

// A rational lower bound on e^2 (partial sum of the exponential series).
Rational e_squared_lower_bound();

// Construction invariants on a run of `sc`: |beta|, safety of every segment,
// strictly increasing t, the per-stage bound d(beta) < running_bound, and
// d(beta) < 12 e^2.
CheckResult construction_invariants(const Scenario& sc, const ConstructionResult& r);

// final d(z) >= c * d_s(z) for every mixed term, all z up to `depth` and all z
// in the run's evaluation sets.
CheckResult dominance(const Scenario& sc, const ConstructionResult& r,
                      std::size_t depth = 8);

// decode_totality recovers the declared flags, the capital trace reaches
// 2^(S+1) by |a| = t_S, and e is 1 on every a shorter than t_0.
CheckResult decoder_end_to_end(const Scenario& sc, const ConstructionResult& r);

// validate_bivariate of e on |a| <= depth_a, |b| <= depth_b.
CheckResult decoder_fairness(const Scenario& sc, std::size_t depth_a = 3,
                             std::size_t depth_b = 12);

// Shipped scenarios, also written to scenarios/*.json.
//   "stage0":  alpha = 10, one total candidate, S = 0
//   "s3":      S = 3 with a declared-partial candidate that diverges
//   "tiny":    constant-cost candidates, t_0 = 1, t_1 = 2, t_2 = 3
std::string builtin_scenario_json(const std::string& name);
Scenario builtin_scenario(const std::string& name);

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  Fault fault = Fault::kNone;
  bool quick = false;  // smaller sample counts
};

// Runs every check, calling `report` after each one. The construction and
// decoder checks use `main` (default: builtin "s3") and the fairness check
// uses the builtin "tiny" scenario.
std::vector<CheckResult> run_suite(const SuiteOptions& options, const Scenario& main,
                                   const std::function<void(const CheckResult&)>& report);

}  // namespace crlab::checks
