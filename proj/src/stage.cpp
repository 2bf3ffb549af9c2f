#include "crlab/stage.hpp"

#include <mutex>

#include "crlab/coding.hpp"

namespace crlab {

std::string to_string(EvalSetMode mode) {
  return mode == EvalSetMode::kFull ? "full" : "prefix";
}

EvalSetMode parse_eval_set_mode(const std::string& text) {
  if (text == "full") return EvalSetMode::kFull;
  if (text == "prefix") return EvalSetMode::kPrefix;
  throw FormatError("eval_set must be \"full\" or \"prefix\", got \"" + text +
                    "\"");
}

Rational stage_epsilon(std::size_t s) { return pow2(-static_cast<long>(s)); }

std::string Mixture::describe(const std::vector<Candidate>& candidates) const {
  std::string out = "1/1 * const(1)";
  for (const auto& term : terms) {
    out += " + " + to_string(term.coefficient) + " * " +
           candidates.at(term.candidate).name;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {
std::string cache_key(std::size_t candidate, const BitString& z) {
  return std::to_string(candidate) + ':' + z.str();
}

bool agrees(const BitSource& oracle, const BitString& reads) {
  for (std::size_t k = 1; k <= reads.size(); ++k) {
    auto b = oracle.try_bit(k);
    if (!b || *b != reads.at(k)) return false;
  }
  return true;
}
}  // namespace

std::optional<mdsl::EvalOutcome> OutcomeCache::find(
    std::size_t candidate, const BitString& z, const BitSource& oracle) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(cache_key(candidate, z));
  if (it == entries_.end()) return std::nullopt;
  for (const auto& e : it->second) {
    if (agrees(oracle, e.reads)) return e.outcome;
  }
  return std::nullopt;
}

void OutcomeCache::store(std::size_t candidate, const BitString& z,
                         const BitSource& oracle,
                         const mdsl::EvalOutcome& outcome) {
  // An out-of-range outcome also depends on where the oracle ends.
  if (std::holds_alternative<mdsl::OracleOutOfRange>(outcome.result)) return;
  Entry entry{oracle.prefix(outcome.oracle_use), outcome};
  std::unique_lock lock(mu_);
  auto& bucket = entries_[cache_key(candidate, z)];
  for (const auto& e : bucket) {
    if (e.reads == entry.reads) return;
  }
  bucket.push_back(std::move(entry));
}

std::size_t OutcomeCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

// ---------------------------------------------------------------------------

StageEvaluator::StageEvaluator(
    std::shared_ptr<const std::vector<Candidate>> candidates, BitSource oracle,
    std::uint64_t budget, std::shared_ptr<OutcomeCache> cache)
    : candidates_(std::move(candidates)),
      oracle_(std::move(oracle)),
      budget_(budget),
      cache_(std::move(cache)) {}

Metering StageEvaluator::component(std::size_t candidate,
                                   const BitString& z) const {
  std::optional<mdsl::EvalOutcome> out;
  if (cache_) out = cache_->find(candidate, z, oracle_);
  if (!out) {
    out = mdsl::evaluate(candidates_->at(candidate).program, z, oracle_, budget_);
    if (cache_) cache_->store(candidate, z, oracle_, *out);
  }
  if (out->ok()) return Metered{out->value(), out->steps, out->oracle_use};
  MeterFailure f{MeterFailure::Kind::kFault, candidate, z, 0, out->describe()};
  if (std::holds_alternative<mdsl::Diverged>(out->result)) {
    f.kind = MeterFailure::Kind::kDiverged;
  } else if (auto* r = std::get_if<mdsl::OracleOutOfRange>(&out->result)) {
    f.kind = MeterFailure::Kind::kOracleRange;
    f.index = r->index;
  }
  return f;
}

Metering StageEvaluator::mixture(const Mixture& m, const BitString& z) const {
  Metered total{1, 1, 0};
  for (const auto& term : m.terms) {
    auto part = component(term.candidate, z);
    if (auto* f = std::get_if<MeterFailure>(&part)) return *f;
    const auto& ok = std::get<Metered>(part);
    total.value += term.coefficient * ok.value;
    total.steps += ok.steps;
    total.use = std::max(total.use, ok.use);
  }
  return total;
}

// ---------------------------------------------------------------------------

std::vector<BitString> evaluation_set(const BitString& beta_start, std::size_t s,
                                      EvalSetMode mode) {
  const std::size_t end = stage_end(s);
  if (mode == EvalSetMode::kFull) return strings_up_to(end);
  std::vector<BitString> out;
  for (std::size_t n = 0; n < beta_start.size(); ++n) {
    out.push_back(beta_start.prefix(n));
  }
  for (const auto& w : strings_up_to(end - beta_start.size())) {
    out.push_back(beta_start.concat(w));
  }
  return out;
}

std::vector<BitString> evaluation_tree_nodes(const BitString& beta_start,
                                             std::size_t s, EvalSetMode mode) {
  const std::size_t end = stage_end(s);
  if (mode == EvalSetMode::kFull) return strings_up_to(end - 1);
  std::vector<BitString> out;
  for (const auto& w : strings_up_to(end - beta_start.size() - 1)) {
    out.push_back(beta_start.concat(w));
  }
  return out;
}

std::variant<StageOpening, MeterFailure> open_stage(const StageEvaluator& ev,
                                                    const Mixture& current,
                                                    const BitString& beta,
                                                    std::size_t s,
                                                    bool candidate_total) {
  StageOpening out;
  out.mixture = current;
  if (s == 0 || !candidate_total) return out;
  const std::size_t index = s - 1;
  if (index >= ev.candidates().size()) {
    throw RangeError("stage " + std::to_string(s) + " has no candidate");
  }
  auto probe = ev.component(index, beta);
  if (auto* f = std::get_if<MeterFailure>(&probe)) return *f;
  const auto& p = std::get<Metered>(probe);
  out.probe_value = p.value;
  out.probe_cut = p.cut();
  if (p.value > 0) {
    out.mixed = true;
    out.coefficient = stage_epsilon(s) / p.value;
    out.mixture.terms.push_back({index, out.coefficient});
  }
  return out;
}

namespace {
struct FailureSignal {
  MeterFailure failure;
};
}  // namespace

PairResult select_pair(const StageEvaluator& ev, const Mixture& mixture,
                       const BitString& beta, std::size_t s) {
  auto eval = [&](const BitString& z) -> Rational {
    auto m = ev.mixture(mixture, z);
    if (auto* f = std::get_if<MeterFailure>(&m)) throw FailureSignal{*f};
    return std::get<Metered>(m).value;
  };
  try {
    return first_two_with(eval, beta, s);
  } catch (const FailureSignal& sig) {
    return sig.failure;
  } catch (const InconsistencyError& e) {
    return Inconsistent{e.what()};
  }
}

namespace {
std::variant<CutResult, MeterFailure> finish_cut(std::vector<BitString> points,
                                                 std::vector<Metering> raw,
                                                 std::uint64_t probe_cut,
                                                 std::uint64_t t_prev) {
  CutResult out;
  out.t_raw = probe_cut;
  out.values.reserve(raw.size());
  for (auto& r : raw) {
    if (auto* f = std::get_if<MeterFailure>(&r)) return *f;
    auto& ok = std::get<Metered>(r);
    out.t_raw = std::max(out.t_raw, ok.cut());
    out.values.push_back(std::move(ok));
  }
  out.t = std::max(out.t_raw, t_prev + 1);
  out.points = std::move(points);
  return out;
}
}  // namespace

std::variant<CutResult, MeterFailure> stage_cut(
    const StageEvaluator& ev, const Mixture& mixture,
    const BitString& beta_start, std::size_t s, EvalSetMode mode,
    std::uint64_t probe_cut, std::uint64_t t_prev, kernels::Execution exec) {
  auto points = evaluation_set(beta_start, s, mode);
  auto raw = kernels::map(
      std::span<const BitString>(points),
      [&](const BitString& z) { return ev.mixture(mixture, z); }, exec);
  return finish_cut(std::move(points), std::move(raw), probe_cut, t_prev);
}

std::variant<CutResult, MeterFailure> stage_cut_serial(
    const StageEvaluator& ev, const Mixture& mixture,
    const BitString& beta_start, std::size_t s, EvalSetMode mode,
    std::uint64_t probe_cut, std::uint64_t t_prev) {
  return stage_cut(ev, mixture, beta_start, s, mode, probe_cut, t_prev,
                   kernels::Execution::kSerial);
}

std::string describe(const MeterFailure& f,
                     const std::vector<Candidate>& candidates) {
  std::string name = f.candidate < candidates.size()
                         ? candidates[f.candidate].name
                         : "#" + std::to_string(f.candidate + 1);
  return "candidate '" + name + "' at \"" + f.input.str() + "\": " + f.message;
}

}  // namespace crlab
