#include "crlab/construction.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace crlab {

using json = nlohmann::json;

std::vector<Candidate> Scenario::public_candidates() const {
  std::vector<Candidate> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back({c.name, c.program});
  return out;
}

namespace {

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw FormatError(where + ": unknown field \"" + key + "\"");
  }
}

BitSource parse_alpha(const json& a) {
  if (!a.is_object()) throw FormatError("alpha must be an object");
  std::string kind = a.at("kind").get<std::string>();
  if (kind == "explicit") {
    require_keys(a, {"kind", "bits"}, "alpha");
    return BitSource::explicit_bits(BitString::parse(a.at("bits").get<std::string>()));
  }
  if (kind == "seeded") {
    require_keys(a, {"kind", "seed", "length"}, "alpha");
    std::optional<std::uint64_t> limit;
    if (a.contains("length")) limit = a.at("length").get<std::uint64_t>();
    return BitSource::seeded(a.at("seed").get<std::uint64_t>(), limit);
  }
  throw FormatError("alpha.kind must be \"explicit\" or \"seeded\"");
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("scenario is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw FormatError("scenario must be a JSON object");
    require_keys(doc,
                 {"format", "alpha", "candidates", "stages", "eval_set",
                  "step_budget", "description"},
                 "scenario");
    if (doc.value("format", "") != kScenarioFormat) {
      throw FormatError(std::string("scenario format must be \"") +
                        kScenarioFormat + "\"");
    }
    Scenario sc;
    sc.alpha = parse_alpha(doc.at("alpha"));
    sc.alpha_json = doc.at("alpha").dump();
    std::set<std::string> names;
    for (const auto& c : doc.at("candidates")) {
      require_keys(c, {"name", "program", "total"}, "candidate");
      ScenarioCandidate cand;
      cand.name = c.at("name").get<std::string>();
      if (!names.insert(cand.name).second) {
        throw FormatError("duplicate candidate name \"" + cand.name + "\"");
      }
      try {
        cand.program = mdsl::parse(c.at("program").get<std::string>());
      } catch (const mdsl::ParseError& e) {
        throw FormatError("candidate \"" + cand.name + "\": " + e.what());
      }
      cand.declared_total = c.at("total").get<bool>();
      sc.candidates.push_back(std::move(cand));
    }
    auto stages = doc.at("stages").get<std::int64_t>();
    if (stages < 0) throw FormatError("stages must be >= 0");
    sc.stages = static_cast<std::size_t>(stages);
    sc.eval_set = parse_eval_set_mode(doc.value("eval_set", std::string("prefix")));
    sc.step_budget = doc.value("step_budget", std::uint64_t{100000});
    if (sc.step_budget == 0) throw FormatError("step_budget must be positive");
    return sc;
  } catch (const json::exception& e) {
    throw FormatError(std::string("scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string scenario_to_json(const Scenario& sc) {
  json doc;
  doc["format"] = kScenarioFormat;
  doc["alpha"] = json::parse(sc.alpha_json.empty() ? "{}" : sc.alpha_json);
  doc["candidates"] = json::array();
  for (const auto& c : sc.candidates) {
    doc["candidates"].push_back({{"name", c.name},
                                 {"program", mdsl::print(c.program)},
                                 {"total", c.declared_total}});
  }
  doc["stages"] = sc.stages;
  doc["eval_set"] = to_string(sc.eval_set);
  doc["step_budget"] = sc.step_budget;
  return doc.dump(2);
}

std::vector<std::string> validate_scenario(const Scenario& sc, std::size_t depth) {
  std::vector<std::string> problems;
  for (const auto& c : sc.candidates) {
    if (!c.declared_total) continue;
    auto check = mdsl::check_program_martingale(c.program, sc.alpha, depth,
                                                sc.step_budget);
    if (!check.passed) {
      problems.push_back("candidate '" + c.name + "' declared total: " +
                         check.message);
    }
  }
  return problems;
}

Martingale mixture_martingale(const Mixture& m,
                              const std::vector<Candidate>& candidates,
                              const BitSource& oracle, std::uint64_t budget) {
  std::vector<std::pair<Rational, Martingale>> terms;
  terms.emplace_back(1, Martingale::constant(1));
  for (const auto& term : m.terms) {
    const auto& c = candidates.at(term.candidate);
    terms.emplace_back(term.coefficient,
                       Martingale::program(c.program, oracle, budget, c.name));
  }
  return Martingale::sum(std::move(terms));
}

// ---------------------------------------------------------------------------

namespace {

class Builder {
 public:
  Builder(const Scenario& sc, const ConstructionOptions& options)
      : sc_(sc),
        options_(options),
        candidates_(std::make_shared<const std::vector<Candidate>>(
            sc.public_candidates())),
        ev_(candidates_, sc.alpha, sc.step_budget,
            std::make_shared<OutcomeCache>()) {}

  ConstructionResult run() {
    validate_up_front();
    ConstructionResult result;
    Mixture mixture;
    std::uint64_t t_prev = 0;
    Rational eps_sum = 0, growth = 1;
    std::unordered_set<BitString> seen;

    for (std::size_t s = 0; s <= sc_.stages; ++s) {
      StageTrace tr;
      tr.s = s;
      tr.beta_start = beta_.size();
      const BitString beta_start = beta_;

      auto opening = unwrap(open_stage(ev_, mixture, beta_, s, declared_total(s)));
      mixture = opening.mixture;
      tr.mixed = opening.mixed;
      tr.coefficient = opening.coefficient;
      tr.probe_value = opening.probe_value;
      tr.mixture = mixture;

      auto [first, second] = unwrap(select_pair(ev_, mixture, beta_, s));
      tr.encoded_total = declared_total(s + 1);
      tr.totality_segment = tr.encoded_total ? second : first;
      beta_.append(tr.totality_segment);

      auto cut = unwrap(stage_cut(ev_, mixture, beta_start, s, sc_.eval_set,
                                  opening.probe_cut, t_prev, options_.exec));
      check_fairness(mixture, beta_start, s, cut);
      tr.t_raw = cut.t_raw;
      tr.t = cut.t;
      tr.evaluations = cut.points.size();
      for (auto& z : cut.points) {
        if (seen.insert(z).second) result.evaluated.push_back(z);
      }
      if (!sc_.alpha.has(tr.t)) throw AlphaTooShortError(tr.t);
      tr.alpha_bit = sc_.alpha.bit(tr.t);

      auto [a_first, a_second] = unwrap(select_pair(ev_, mixture, beta_, s));
      tr.alpha_segment = tr.alpha_bit ? a_second : a_first;
      beta_.append(tr.alpha_segment);

      tr.d_at_beta = value(mixture, beta_);
      Rational eps = stage_epsilon(s);
      if (tr.mixed) eps_sum += eps;
      growth *= (1 + eps) * (1 + eps);
      tr.running_bound = (1 + eps_sum) * growth;

      t_prev = tr.t;
      result.traces.push_back(std::move(tr));
    }
    result.beta = beta_;
    result.mixture = mixture;
    result.final_d = mixture_martingale(mixture, *candidates_, sc_.alpha,
                                        sc_.step_budget);
    std::sort(result.evaluated.begin(), result.evaluated.end());
    return result;
  }

 private:
  // Stage s mixes candidate s (1-based); candidates past the list are
  // treated as not total.
  bool declared_total(std::size_t s) const {
    return s >= 1 && s <= sc_.candidates.size() &&
           sc_.candidates[s - 1].declared_total;
  }

  [[noreturn]] void fail(const MeterFailure& f) const {
    if (f.kind == MeterFailure::Kind::kOracleRange) throw AlphaTooShortError(f.index);
    throw ScenarioError("declared-total " + describe(f, *candidates_));
  }

  template <class T>
  T unwrap(std::variant<T, MeterFailure> v) const {
    if (auto* f = std::get_if<MeterFailure>(&v)) fail(*f);
    return std::get<T>(std::move(v));
  }

  std::pair<BitString, BitString> unwrap(PairResult v) const {
    if (auto* f = std::get_if<MeterFailure>(&v)) fail(*f);
    if (auto* i = std::get_if<Inconsistent>(&v)) {
      throw ScenarioError("internal inconsistency: " + i->message);
    }
    return std::get<std::pair<BitString, BitString>>(std::move(v));
  }

  Rational value(const Mixture& m, const BitString& z) const {
    return unwrap(ev_.mixture(m, z)).value;
  }

  void validate_up_front() const {
    std::size_t depth = std::min(options_.validate_depth, stage_end(sc_.stages));
    for (const auto& c : sc_.candidates) {
      if (!c.declared_total) continue;
      auto check =
          mdsl::check_program_martingale(c.program, sc_.alpha, depth, sc_.step_budget);
      if (check.passed) continue;
      auto out = mdsl::evaluate(c.program, check.witness, sc_.alpha, sc_.step_budget);
      if (auto* r = std::get_if<mdsl::OracleOutOfRange>(&out.result)) {
        throw AlphaTooShortError(r->index);
      }
      throw ScenarioError("declared-total candidate '" + c.name +
                          "' fails validation: " + check.message);
    }
  }

  // Fairness of d on the evaluation tree; names the offending candidate.
  void check_fairness(const Mixture& mixture, const BitString& beta_start,
                      std::size_t s, const CutResult& cut) const {
    std::unordered_map<BitString, const Rational*> at;
    at.reserve(cut.points.size());
    for (std::size_t i = 0; i < cut.points.size(); ++i) {
      at.emplace(cut.points[i], &cut.values[i].value);
    }
    for (const auto& z : evaluation_tree_nodes(beta_start, s, sc_.eval_set)) {
      const Rational& v = *at.at(z);
      if (*at.at(z.with(0)) + *at.at(z.with(1)) == 2 * v) continue;
      for (const auto& term : mixture.terms) {
        auto f = [&](const BitString& w) {
          return unwrap(ev_.component(term.candidate, w)).value;
        };
        if (f(z.with(0)) + f(z.with(1)) != 2 * f(z)) {
          throw ScenarioError("declared-total candidate '" +
                              (*candidates_)[term.candidate].name +
                              "' is unfair at \"" + z.str() + "\"");
        }
      }
      throw ScenarioError("mixture is unfair at \"" + z.str() + "\"");
    }
  }

  const Scenario& sc_;
  ConstructionOptions options_;
  std::shared_ptr<const std::vector<Candidate>> candidates_;
  StageEvaluator ev_;
  BitString beta_;
};

}  // namespace

ConstructionResult run_construction(const Scenario& sc,
                                    const ConstructionOptions& options) {
  return Builder(sc, options).run();
}

void write_trace_csv(std::ostream& os, const ConstructionResult& r) {
  os << "s,mixed,coefficient,totality_segment,encoded_total,alpha_segment,t_raw,"
        "t,alpha_bit,d_at_beta,running_bound\n";
  for (const auto& tr : r.traces) {
    os << tr.s << ',' << (tr.mixed ? 1 : 0) << ',' << to_string(tr.coefficient)
       << ',' << tr.totality_segment.str() << ',' << (tr.encoded_total ? 1 : 0)
       << ',' << tr.alpha_segment.str() << ',' << tr.t_raw << ',' << tr.t << ','
       << tr.alpha_bit << ',' << to_string(tr.d_at_beta) << ','
       << to_string(tr.running_bound) << '\n';
  }
}

void write_construction(const ConstructionResult& r, const Scenario& sc,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw FormatError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("beta.txt");
    out << r.beta.str() << '\n';
  }
  {
    auto out = open("trace.csv");
    write_trace_csv(out, r);
  }
  {
    auto out = open("mixture.txt");
    auto candidates = sc.public_candidates();
    out << "d = " << r.mixture.describe(candidates) << '\n';
    for (const auto& term : r.mixture.terms) {
      const auto& c = candidates[term.candidate];
      out << c.name << " = " << mdsl::print(c.program) << '\n';
    }
  }
}

}  // namespace crlab
