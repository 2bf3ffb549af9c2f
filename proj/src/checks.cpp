#include "crlab/checks.hpp"

#include <chrono>
#include <sstream>

#include "crlab/bivariate.hpp"
#include "crlab/coding.hpp"
#include "crlab/decoder.hpp"

namespace crlab::checks {

namespace {

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

CheckResult pass(std::string name, std::string detail, const Timer& timer) {
  return {std::move(name), true, std::move(detail), timer.seconds()};
}

CheckResult fail(std::string name, std::string detail, const Timer& timer) {
  return {std::move(name), false, std::move(detail), timer.seconds()};
}

std::uint64_t table_seed(std::uint64_t seed, std::size_t k) {
  return splitmix64_mix(seed ^ (0xA5A5A5A5ULL + k));
}

// Fails with a message if the generated input is not a fair table.
std::optional<std::string> unfair_input(const Martingale& f, std::size_t depth,
                                        std::size_t k) {
  auto report = validate_fairness(f, depth);
  if (report.passed()) return std::nullopt;
  return "input table #" + std::to_string(k) + " is not a martingale at \"" +
         report.node.str() + "\": " + report.message;
}

}  // namespace

Martingale random_fair_table(std::uint64_t seed, std::size_t depth, Fault fault) {
  SplitMix64 rng(seed);
  const std::size_t nodes = (std::size_t{1} << (depth + 1)) - 1;
  const std::size_t internal = (std::size_t{1} << depth) - 1;
  std::vector<Rational> values(nodes);
  values[0] = 1;
  for (std::size_t h = 0; h < internal; ++h) {
    auto k = static_cast<long>(rng.below(9));
    values[2 * h + 1] = values[h] * ratio(k, 4);
    values[2 * h + 2] = values[h] * ratio(8 - k, 4);
  }
  if (fault == Fault::kUnfairTables && depth > 0) values[2] += ratio(1, 4);
  return Martingale::table(depth, std::move(values));
}

CheckResult safe_extension_counts(std::uint64_t seed, std::size_t tables,
                                  std::size_t depth, std::size_t max_i,
                                  Fault fault) {
  const std::string name = "safe extension counts";
  Timer timer;
  std::size_t queries = 0, minimum = SIZE_MAX;
  for (std::size_t k = 0; k < tables; ++k) {
    auto d = random_fair_table(table_seed(seed, k), depth, fault);
    if (auto bad = unfair_input(d, depth, k)) return fail(name, *bad, timer);
    for (std::size_t i = 0; i <= max_i && i + 2 <= depth; ++i) {
      for (const auto& x : strings_up_to(depth - i - 2)) {
        if (d(x) == 0) continue;
        auto count = safe_extensions(d, x, i, kernels::Execution::kSerial).size();
        ++queries;
        minimum = std::min(minimum, count);
        if (count < 2) {
          return fail(name,
                      "table #" + std::to_string(k) + ", x = \"" + x.str() +
                          "\", i = " + std::to_string(i) + ": only " +
                          std::to_string(count) + " safe extensions",
                      timer);
        }
      }
    }
  }
  return pass(name,
              std::to_string(tables) + " tables, " + std::to_string(queries) +
                  " queries, minimum count " + std::to_string(minimum),
              timer);
}

CheckResult univariate_round_trip(std::uint64_t seed, std::size_t count,
                                  std::size_t depth, std::size_t rect, Fault fault) {
  const std::string name = "univariate round trip";
  Timer timer;
  for (std::size_t k = 0; k < count; ++k) {
    auto f = random_fair_table(table_seed(seed + 1, k), depth, fault);
    if (auto bad = unfair_input(f, depth, k)) return fail(name, *bad, timer);
    auto g = from_univariate(f);
    auto back = to_univariate(g);
    for (const auto& z : strings_up_to(depth)) {
      if (back(z) != f(z)) {
        return fail(name,
                    "f #" + std::to_string(k) + " differs at \"" + z.str() + "\"",
                    timer);
      }
    }
    auto report = validate_bivariate(g, rect, rect);
    if (!report.passed()) {
      return fail(name,
                  "from_univariate(f #" + std::to_string(k) + ") at (\"" +
                      report.x.str() + "\", \"" + report.y.str() +
                      "\"): " + report.message,
                  timer);
    }
  }
  return pass(name, std::to_string(count) + " martingales", timer);
}

CheckResult savings_properties(std::uint64_t seed, std::size_t count,
                               std::size_t depth, Fault fault) {
  const std::string name = "savings transform";
  Timer timer;
  for (std::size_t k = 0; k < count; ++k) {
    auto f = random_fair_table(table_seed(seed + 2, k), depth, fault);
    if (auto bad = unfair_input(f, depth, k)) return fail(name, *bad, timer);
    auto saved = savings_transform(f);
    auto report = validate_fairness(saved, depth);
    if (!report.passed()) {
      return fail(name,
                  "f' #" + std::to_string(k) + " unfair at \"" + report.node.str() +
                      "\"",
                  timer);
    }
    for (const auto& x : strings_up_to(depth)) {
      auto here = savings_state(f, x);
      if (saved(x) != here.value()) {
        return fail(name, "state and transform disagree at \"" + x.str() + "\"",
                    timer);
      }
      if (here.value() > 2 * here.banked) {
        return fail(name, "f' > 2s at \"" + x.str() + "\"", timer);
      }
      if (x.empty()) continue;
      auto parent = savings_state(f, x.parent());
      if (2 * here.value() < parent.value()) {
        return fail(name, "f' drops below half at \"" + x.str() + "\"", timer);
      }
      if (here.banked < parent.banked) {
        return fail(name, "banked part decreases at \"" + x.str() + "\"", timer);
      }
    }
  }
  return pass(name, std::to_string(count) + " martingales", timer);
}

CheckResult bivariate_halving(std::uint64_t seed, std::size_t count,
                              std::size_t rect, Fault fault) {
  const std::string name = "bivariate savings halving";
  Timer timer;
  std::size_t unequal_pairs = 0, unequal_violations = 0;
  for (std::size_t k = 0; k < count; ++k) {
    auto f = random_fair_table(table_seed(seed + 4, k), 2 * rect, fault);
    if (auto bad = unfair_input(f, 2 * rect, k)) return fail(name, *bad, timer);
    auto saved = bivariate_savings(from_univariate(f));
    for (const auto& x : strings_up_to(rect)) {
      for (const auto& y : strings_up_to(rect)) {
        const Rational here = saved(x, y);
        for (int v : {0, 1}) {
          if (x.size() == y.size() && x.size() < rect) {
            for (int w : {0, 1}) {
              if (2 * saved(x.with(v), y.with(w)) < here) {
                return fail(name,
                            "equal-length chain drops below half at (\"" + x.str() +
                                "\", \"" + y.str() + "\")",
                            timer);
              }
            }
          }
          if (x.size() < rect) {
            ++unequal_pairs;
            if (2 * saved(x.with(v), y) < here) ++unequal_violations;
          }
          if (y.size() < rect) {
            ++unequal_pairs;
            if (2 * saved(x, y.with(v)) < here) ++unequal_violations;
          }
        }
      }
    }
  }
  std::ostringstream detail;
  detail << count << " martingales, equal-length chains hold; single-coordinate steps "
         << "below half: " << unequal_violations << " of " << unequal_pairs
         << " (reported only)";
  return pass(name, detail.str(), timer);
}

CheckResult decomposition_product(std::uint64_t seed, std::size_t count,
                                  std::size_t depth, Fault fault) {
  const std::string name = "odd/even decomposition";
  Timer timer;
  std::size_t zero_nodes = 0;
  for (std::size_t k = 0; k < count; ++k) {
    auto f = random_fair_table(table_seed(seed + 3, k), depth, fault);
    if (auto bad = unfair_input(f, depth, k)) return fail(name, *bad, timer);
    auto [odd, even] = decompose_odd_even(f, depth);
    for (const auto* part : {&odd, &even}) {
      auto report = validate_fairness(*part, depth);
      if (!report.passed()) {
        return fail(name, "factor unfair at \"" + report.node.str() + "\"", timer);
      }
    }
    for (const auto& x : strings_up_to(depth)) {
      if (f(x) == 0) ++zero_nodes;
      if (odd(x) * even(x) != f(x)) {
        return fail(name,
                    "f #" + std::to_string(k) + ": product differs at \"" +
                        x.str() + "\"",
                    timer);
      }
      if (x.empty()) continue;
      const bool odd_position = x.size() % 2 == 1;
      const auto& idle = odd_position ? even : odd;
      if (idle(x) != idle(x.parent())) {
        return fail(name, "a factor bets out of turn at \"" + x.str() + "\"", timer);
      }
    }
  }
  return pass(name,
              std::to_string(count) + " martingales, " + std::to_string(zero_nodes) +
                  " zero-capital nodes",
              timer);
}

Rational e_squared_lower_bound() {
  Rational sum = 0, term = 1;
  for (int k = 0; k <= 30; ++k) {
    sum += term;
    term = term * 2 / (k + 1);
  }
  return sum;
}

CheckResult construction_invariants(const Scenario& sc, const ConstructionResult& r) {
  const std::string name = "construction invariants";
  Timer timer;
  const auto candidates = sc.public_candidates();
  if (r.beta.size() != stage_end(sc.stages)) {
    return fail(name,
                "|beta| = " + std::to_string(r.beta.size()) + ", expected " +
                    std::to_string(stage_end(sc.stages)),
                timer);
  }
  std::uint64_t last_t = 0;
  for (const auto& tr : r.traces) {
    auto d = mixture_martingale(tr.mixture, candidates, sc.alpha, sc.step_budget);
    const std::string at = "stage " + std::to_string(tr.s) + ": ";
    BitString x = r.beta.prefix(tr.beta_start);
    for (const auto& y : {tr.totality_segment, tr.alpha_segment}) {
      if (y.size() != segment_length(tr.s)) {
        return fail(name, at + "segment has the wrong length", timer);
      }
      BitString xy = x.concat(y);
      if (!is_safe(d(xy), d(x), tr.s)) {
        return fail(name, at + "segment \"" + y.str() + "\" is not safe", timer);
      }
      x = xy;
    }
    if (tr.t <= last_t && tr.s > 0) {
      return fail(name, at + "t does not increase", timer);
    }
    last_t = tr.t;
    if (!(tr.d_at_beta < tr.running_bound)) {
      return fail(name,
                  at + "d(beta) = " + to_string(tr.d_at_beta) +
                      " is not below the bound " + to_string(tr.running_bound),
                  timer);
    }
    if (d(x) != tr.d_at_beta) {
      return fail(name, at + "recorded d(beta) disagrees with the mixture", timer);
    }
  }
  Rational limit = 12 * e_squared_lower_bound();
  Rational final_value = r.final_d(r.beta);
  if (!(final_value < limit)) {
    return fail(name, "d(beta) = " + to_string(final_value) + " >= 12 e^2", timer);
  }
  std::ostringstream detail;
  detail << "|beta| = " << r.beta.size() << ", t = ";
  for (std::size_t k = 0; k < r.traces.size(); ++k) {
    detail << (k ? "," : "") << r.traces[k].t;
  }
  detail << ", d(beta) = " << final_value.get_d();
  return pass(name, detail.str(), timer);
}

CheckResult dominance(const Scenario& sc, const ConstructionResult& r,
                      std::size_t depth) {
  const std::string name = "dominance";
  Timer timer;
  std::vector<BitString> points = strings_up_to(depth);
  points.insert(points.end(), r.evaluated.begin(), r.evaluated.end());
  std::size_t checked = 0;
  try {
    for (const auto& term : r.mixture.terms) {
      const auto& c = sc.candidates.at(term.candidate);
      auto component = Martingale::program(c.program, sc.alpha, sc.step_budget, c.name);
      auto bad = kernels::first_violation(points.size(), [&](std::size_t k) {
        return r.final_d(points[k]) < term.coefficient * component(points[k]);
      });
      if (bad) {
        return fail(name,
                    "d < c * " + c.name + " at \"" + points[*bad].str() + "\"",
                    timer);
      }
      checked += points.size();
    }
  } catch (const Error& e) {
    return fail(name, e.what(), timer);
  }
  return pass(name,
              std::to_string(r.mixture.terms.size()) + " mixed terms, " +
                  std::to_string(checked) + " comparisons",
              timer);
}

CheckResult decoder_end_to_end(const Scenario& sc, const ConstructionResult& r) {
  const std::string name = "decoder end to end";
  Timer timer;
  auto ctx = DecoderContext::from_scenario(sc);
  const std::uint64_t t_last = r.traces.back().t;
  BitString alpha = sc.alpha.prefix(t_last);
  std::vector<bool> expected;
  for (std::size_t s = 0; s <= sc.stages; ++s) {
    expected.push_back(s < sc.candidates.size() && sc.candidates[s].declared_total);
  }
  try {
    auto flags = decode_totality(r.beta, ctx, alpha);
    if (flags != expected) return fail(name, "decoded flags differ", timer);
  } catch (const DecodeError& e) {
    return fail(name, e.what(), timer);
  }
  auto trace = capital_trace(alpha, r.beta, ctx);
  for (const auto& [n, value] : trace) {
    if (n < r.traces.front().t && value != 1) {
      return fail(name, "e != 1 before t_0 at |a| = " + std::to_string(n), timer);
    }
  }
  for (const auto& tr : r.traces) {
    Rational want = pow2(static_cast<long>(tr.s + 1));
    if (trace.at(tr.t).second != want) {
      return fail(name,
                  "e = " + to_string(trace.at(tr.t).second) + " at |a| = t_" +
                      std::to_string(tr.s) + ", expected " + to_string(want),
                  timer);
    }
  }
  return pass(name,
              "flags recovered, e reaches " + to_string(trace.back().second) +
                  " at |a| = " + std::to_string(t_last),
              timer);
}

CheckResult decoder_fairness(const Scenario& sc, std::size_t depth_a,
                             std::size_t depth_b) {
  const std::string name = "decoder fairness";
  Timer timer;
  auto ctx = DecoderContext::from_scenario(sc);
  auto report = validate_bivariate(decoder_martingale(ctx), depth_a, depth_b);
  if (!report.passed()) {
    return fail(name,
                "at (\"" + report.x.str() + "\", \"" + report.y.str() +
                    "\"): " + report.message,
                timer);
  }
  return pass(name,
              "|a| <= " + std::to_string(depth_a) + ", |b| <= " +
                  std::to_string(depth_b),
              timer);
}

std::string builtin_scenario_json(const std::string& name) {
  if (name == "stage0") {
    return R"json({
  "format": "crlab-scenario/1",
  "description": "One stage: alpha_1 = 1 and a single total candidate.",
  "alpha": {"kind": "explicit", "bits": "10"},
  "candidates": [
    {"name": "one", "program": "1", "total": true}
  ],
  "stages": 0,
  "eval_set": "prefix",
  "step_budget": 1000
})json";
  }
  if (name == "s3") {
    return R"json({
  "format": "crlab-scenario/1",
  "description": "Four stages; the second candidate diverges beyond length 2.",
  "alpha": {"kind": "seeded", "seed": 7, "length": 4096},
  "candidates": [
    {"name": "follow", "program": "(fold 1 (mul (acc) (if (= (bit (pos)) (oracle (pos))) 3/2 1/2)))", "total": true},
    {"name": "partial", "program": "(if (< (len) 3) 1 (diverge))", "total": false},
    {"name": "first-bit", "program": "(if (= (len) 0) 1 (if (= (bit 1) (oracle 1)) 2 0))", "total": true},
    {"name": "fourth", "program": "(fold 1 (mul (acc) (if (= (bit (pos)) 0) 5/4 3/4)))", "total": true}
  ],
  "stages": 3,
  "eval_set": "prefix",
  "step_budget": 100000
})json";
  }
  if (name == "tiny") {
    return R"json({
  "format": "crlab-scenario/1",
  "description": "Constant-cost candidates for exhaustive decoder checks.",
  "alpha": {"kind": "seeded", "seed": 3, "length": 64},
  "candidates": [
    {"name": "one", "program": "1", "total": true},
    {"name": "never", "program": "(diverge)", "total": false},
    {"name": "two", "program": "2", "total": true}
  ],
  "stages": 2,
  "eval_set": "prefix",
  "step_budget": 1000
})json";
  }
  throw RangeError("no builtin scenario named \"" + name + "\"");
}

Scenario builtin_scenario(const std::string& name) {
  return parse_scenario(builtin_scenario_json(name));
}

std::vector<CheckResult> run_suite(const SuiteOptions& options, const Scenario& main,
                                   const std::function<void(const CheckResult&)>& report) {
  std::vector<CheckResult> out;
  auto record = [&](CheckResult r) {
    if (report) report(r);
    out.push_back(std::move(r));
  };
  const std::size_t scale = options.quick ? 5 : 1;
  record(safe_extension_counts(options.seed, 200 / scale, 8, 5, options.fault));
  record(univariate_round_trip(options.seed, 50 / scale, 10, 6, options.fault));
  record(savings_properties(options.seed, 50 / scale, 10, options.fault));
  record(decomposition_product(options.seed, 50 / scale, 8, options.fault));
  record(bivariate_halving(options.seed, 10 / scale, 4, options.fault));

  std::optional<ConstructionResult> run;
  {
    Timer timer;
    try {
      run = run_construction(main);
    } catch (const Error& e) {
      record(fail("construction invariants", e.what(), timer));
    }
  }
  if (run) {
    record(construction_invariants(main, *run));
    record(dominance(main, *run));
    record(decoder_end_to_end(main, *run));
  }
  record(decoder_fairness(builtin_scenario("tiny"), 3, options.quick ? 10 : 12));
  return out;
}

}  // namespace crlab::checks
