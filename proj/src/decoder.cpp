#include "crlab/decoder.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

namespace crlab {

namespace {
using Pair = std::pair<BitString, BitString>;

struct OpeningData {
  StageOpening opening;
  Pair pair;
};

struct CutData {
  std::uint64_t t;
  Pair pair;
};
}  // namespace

struct DecoderContext::Caches {
  std::shared_ptr<OutcomeCache> outcomes = std::make_shared<OutcomeCache>();
  std::shared_mutex mu;
  // Values of the replay from a segment boundary that lies beyond b, keyed
  // by (a, beta consumed so far, phase). Such a state is a function of
  // (a, beta) alone, so the value is shared by every b it extends.
  std::unordered_map<std::string, Rational> memo;
  // Stage data at a segment boundary, which depends only on (a, beta consumed)
  // and so is valid for every b. nullopt means the replay stops there.
  std::unordered_map<std::string, std::optional<OpeningData>> openings;
  std::unordered_map<std::string, std::optional<CutData>> cuts;
};

DecoderContext::DecoderContext(std::vector<Candidate> candidates,
                               EvalSetMode mode, std::uint64_t budget)
    : candidates_(std::make_shared<const std::vector<Candidate>>(std::move(candidates))),
      mode_(mode),
      budget_(budget),
      caches_(std::make_shared<Caches>()) {}

DecoderContext DecoderContext::from_scenario(const Scenario& sc) {
  return DecoderContext(sc.public_candidates(), sc.eval_set, sc.step_budget);
}

std::string to_string(ReplayStage::Status status) {
  switch (status) {
    case ReplayStage::Status::kBet:
      return "bet";
    case ReplayStage::Status::kMalformed:
      return "malformed";
    case ReplayStage::Status::kStopped:
      return "stopped";
    case ReplayStage::Status::kIncomplete:
      return "incomplete";
  }
  return "?";
}

namespace {

struct StageState {
  std::size_t s = 0;
  BitString beta;
  Mixture mixture;
  std::uint64_t t_prev = 0;
  bool pending = false;  // decoded totality of candidate s
};

// State after a valid totality segment has been read.
struct AlphaPhase {
  std::size_t s;
  BitString beta_start;
  BitString beta;  // includes the totality segment
  Mixture mixture;
  std::uint64_t t_prev;
  std::uint64_t probe_cut;
  bool flag;  // decoded totality of candidate s + 1
};

class LazyReplay {
 public:
  LazyReplay(const DecoderContext& ctx, const BitString& a, const BitString& b)
      : ctx_(ctx),
        a_(a),
        b_(b),
        ev_(ctx.shared_candidates(), BitSource::explicit_bits(a), ctx.budget(),
            ctx.caches().outcomes) {}

  Rational run() { return from_stage(StageState{}); }

 private:
  using Continue = std::function<Rational(const BitString&, int)>;

  // Ratio of the final value to the capital held at the start of stage st.s.
  Rational from_stage(const StageState& st) {
    // Every branch below either freezes, stops, or needs t <= |a|.
    if (st.t_prev + 1 > a_.size()) return 1;
    return memoized(st.beta, '0', [&]() -> Rational {
      const auto& data = opening(st);
      if (!data) return 1;
      const auto& op = data->opening;
      return read_segment(st.beta, segment_length(st.s), data->pair,
                          [&](const BitString& y, int which) -> Rational {
                            bool flag = which == 1;
                            if (flag && st.s + 1 > ctx_.candidates().size()) {
                              return 1;  // no such candidate: freeze
                            }
                            return after_totality(AlphaPhase{
                                st.s, st.beta, st.beta.concat(y), op.mixture,
                                st.t_prev, op.probe_cut, flag});
                          });
    });
  }

  Rational after_totality(const AlphaPhase& p) {
    return memoized(p.beta, '1', [&]() -> Rational {
      const auto& data = cut(p);
      if (!data) return 1;
      const std::uint64_t t = data->t;
      return read_segment(
          p.beta, segment_length(p.s), data->pair,
          [&](const BitString& y, int bit) -> Rational {
            if (a_.at(t) != bit) return 0;
            return 2 * from_stage(StageState{p.s + 1, p.beta.concat(y),
                                             p.mixture, t, p.flag});
          });
    });
  }

  const std::optional<OpeningData>& opening(const StageState& st) {
    return lookup(ctx_.caches().openings, st.beta, [&]() -> std::optional<OpeningData> {
      auto opened = open_stage(ev_, st.mixture, st.beta, st.s, st.pending);
      auto* op = std::get_if<StageOpening>(&opened);
      if (!op) return std::nullopt;
      auto pr = select_pair(ev_, op->mixture, st.beta, st.s);
      auto* pair = std::get_if<Pair>(&pr);
      if (!pair) return std::nullopt;
      return OpeningData{*op, *pair};
    });
  }

  const std::optional<CutData>& cut(const AlphaPhase& p) {
    return lookup(ctx_.caches().cuts, p.beta, [&]() -> std::optional<CutData> {
      auto cut = stage_cut(ev_, p.mixture, p.beta_start, p.s, ctx_.mode(),
                           p.probe_cut, p.t_prev);
      auto* c = std::get_if<CutResult>(&cut);
      if (!c || c->t > a_.size()) return std::nullopt;
      auto pr = select_pair(ev_, p.mixture, p.beta, p.s);
      auto* pair = std::get_if<Pair>(&pr);
      if (!pair) return std::nullopt;
      return CutData{c->t, *pair};
    });
  }

  // Entries are never erased, so references into the map stay valid.
  template <class Map, class Fn>
  const typename Map::mapped_type& lookup(Map& map, const BitString& beta,
                                          Fn&& compute) {
    std::string key = a_.str() + '|' + beta.str();
    auto& caches = ctx_.caches();
    {
      std::shared_lock lock(caches.mu);
      if (auto it = map.find(key); it != map.end()) return it->second;
    }
    auto value = compute();
    std::unique_lock lock(caches.mu);
    return map.emplace(std::move(key), std::move(value)).first->second;
  }

  // Reads the segment of the given length after beta from b. A segment that
  // is neither of the pair freezes (ratio 1). Unread bits are averaged.
  Rational read_segment(const BitString& beta, std::size_t length,
                        const Pair& pair, const Continue& next) {
    std::size_t known = 0;
    if (b_.size() > beta.size()) known = std::min(length, b_.size() - beta.size());
    BitString seen = known ? b_.slice(beta.size() + 1, known) : BitString();
    if (known == length) {
      if (seen == pair.first) return next(pair.first, 0);
      if (seen == pair.second) return next(pair.second, 1);
      return 1;
    }
    Rational outcomes = pow2(static_cast<long>(length - known));
    Rational total = 0, valid = 0;
    if (seen.is_prefix_of(pair.first)) {
      total += next(pair.first, 0);
      valid += 1;
    }
    if (seen.is_prefix_of(pair.second)) {
      total += next(pair.second, 1);
      valid += 1;
    }
    return (total + (outcomes - valid)) / outcomes;
  }

  template <class Fn>
  Rational memoized(const BitString& beta, char phase, Fn&& compute) {
    if (beta.size() < b_.size()) return compute();
    std::string key = a_.str() + '|' + beta.str() + '|' + phase;
    auto& caches = ctx_.caches();
    {
      std::shared_lock lock(caches.mu);
      if (auto it = caches.memo.find(key); it != caches.memo.end()) return it->second;
    }
    Rational v = compute();
    std::unique_lock lock(caches.mu);
    caches.memo.emplace(std::move(key), v);
    return v;
  }

  const DecoderContext& ctx_;
  const BitString& a_;
  const BitString& b_;
  StageEvaluator ev_;
};

}  // namespace

Rational eval_e(const BitString& a, const BitString& b, const DecoderContext& ctx) {
  if (a.empty()) return 1;
  return LazyReplay(ctx, a, b).run();
}

BivariateMartingale decoder_martingale(const DecoderContext& ctx) {
  return BivariateMartingale::from_function(
      [ctx](const BitString& a, const BitString& b) { return eval_e(a, b, ctx); },
      "decoder");
}

std::vector<ReplayStage> replay(const BitString& a, const BitString& b,
                                const DecoderContext& ctx) {
  using Status = ReplayStage::Status;
  StageEvaluator ev(ctx.shared_candidates(), BitSource::explicit_bits(a),
                    ctx.budget(), ctx.caches().outcomes);
  std::vector<ReplayStage> out;
  StageState st;
  for (;; ++st.s) {
    if (st.beta.size() >= b.size()) break;
    ReplayStage rec;
    rec.s = st.s;
    rec.consumed = st.beta.size();
    const std::size_t len = segment_length(st.s);
    auto finish = [&](Status status, std::string note) {
      rec.status = status;
      rec.note = std::move(note);
      out.push_back(rec);
    };
    if (b.size() - st.beta.size() < len) {
      finish(Status::kIncomplete, "b ends inside the totality segment");
      break;
    }
    auto opened = open_stage(ev, st.mixture, st.beta, st.s, st.pending);
    if (auto* f = std::get_if<MeterFailure>(&opened)) {
      finish(Status::kStopped, "probe failed: " + describe(*f, ctx.candidates()));
      break;
    }
    auto op = std::get<StageOpening>(opened);
    auto pr = select_pair(ev, op.mixture, st.beta, st.s);
    if (auto* f = std::get_if<MeterFailure>(&pr)) {
      finish(Status::kStopped, describe(*f, ctx.candidates()));
      break;
    }
    if (auto* i = std::get_if<Inconsistent>(&pr)) {
      finish(Status::kMalformed, i->message);
      break;
    }
    rec.expected_totality = std::get<std::pair<BitString, BitString>>(pr);
    rec.totality_segment = b.slice(st.beta.size() + 1, len);
    if (rec.totality_segment == rec.expected_totality.first) {
      rec.decoded_total = false;
    } else if (rec.totality_segment == rec.expected_totality.second) {
      rec.decoded_total = true;
    } else {
      finish(Status::kMalformed, "totality segment is not a safe choice");
      break;
    }
    const BitString beta_start = st.beta;
    st.beta.append(rec.totality_segment);
    rec.consumed = st.beta.size();
    if (*rec.decoded_total && st.s + 1 > ctx.candidates().size()) {
      finish(Status::kMalformed, "decoded a total candidate beyond the list");
      break;
    }
    auto cut = stage_cut(ev, op.mixture, beta_start, st.s, ctx.mode(),
                         op.probe_cut, st.t_prev);
    if (auto* f = std::get_if<MeterFailure>(&cut)) {
      finish(Status::kStopped,
             (f->kind == MeterFailure::Kind::kOracleRange
                  ? "oracle read past |a|: "
                  : "evaluation failed: ") +
                 describe(*f, ctx.candidates()));
      break;
    }
    rec.t = std::get<CutResult>(cut).t;
    if (*rec.t > a.size()) {
      finish(Status::kStopped, "t exceeds |a|");
      break;
    }
    if (b.size() - st.beta.size() < len) {
      finish(Status::kIncomplete, "b ends inside the alpha segment");
      break;
    }
    auto pr2 = select_pair(ev, op.mixture, st.beta, st.s);
    if (!std::holds_alternative<std::pair<BitString, BitString>>(pr2)) {
      finish(Status::kMalformed, "no safe pair for the alpha segment");
      break;
    }
    rec.expected_alpha = std::get<std::pair<BitString, BitString>>(pr2);
    rec.alpha_segment = b.slice(st.beta.size() + 1, len);
    if (rec.alpha_segment == rec.expected_alpha.first) {
      rec.expected_bit = 0;
    } else if (rec.alpha_segment == rec.expected_alpha.second) {
      rec.expected_bit = 1;
    } else {
      finish(Status::kMalformed, "alpha segment is not a safe choice");
      break;
    }
    st.beta.append(rec.alpha_segment);
    rec.consumed = st.beta.size();
    finish(Status::kBet, "");
    st.mixture = op.mixture;
    st.t_prev = *rec.t;
    st.pending = *rec.decoded_total;
  }
  return out;
}

std::vector<bool> decode_totality(const BitString& beta, const DecoderContext& ctx,
                                  const BitString& alpha_prefix) {
  auto stages = replay(alpha_prefix, beta, ctx);
  std::vector<bool> flags;
  for (const auto& rec : stages) {
    switch (rec.status) {
      case ReplayStage::Status::kMalformed:
        throw DecodeError(
            "malformed segment at stage " + std::to_string(rec.s) + ": got \"" +
            (rec.decoded_total ? rec.alpha_segment : rec.totality_segment).str() +
            "\", expected \"" +
            (rec.decoded_total ? rec.expected_alpha : rec.expected_totality)
                .first.str() +
            "\" or \"" +
            (rec.decoded_total ? rec.expected_alpha : rec.expected_totality)
                .second.str() +
            "\" (" + rec.note + ")");
      case ReplayStage::Status::kStopped:
        throw DecodeError("replay stopped at stage " + std::to_string(rec.s) +
                          " (" + rec.note + "); a longer alpha prefix is needed");
      case ReplayStage::Status::kIncomplete:
        throw DecodeError("beta ends inside stage " + std::to_string(rec.s));
      case ReplayStage::Status::kBet:
        flags.push_back(*rec.decoded_total);
        break;
    }
  }
  return flags;
}

std::vector<std::pair<std::size_t, Rational>> capital_trace(
    const BitString& alpha_prefix, const BitString& beta,
    const DecoderContext& ctx) {
  std::vector<std::pair<std::size_t, Rational>> out;
  for (std::size_t n = 0; n <= alpha_prefix.size(); ++n) {
    out.emplace_back(n, eval_e(alpha_prefix.prefix(n), beta, ctx));
  }
  return out;
}

// Length of alpha needed to replay all of beta: doubles the prefix until the
// replay consumes beta or the source runs out.
BitString alpha_for_replay(const Scenario& sc, const BitString& beta,
                           const DecoderContext& ctx) {
  const auto available = sc.alpha.length();
  std::uint64_t n = 64;
  for (;;) {
    if (available && n > *available) n = *available;
    auto prefix = sc.alpha.prefix(n);
    auto stages = replay(prefix, beta, ctx);
    bool done = !stages.empty() && stages.back().consumed == beta.size() &&
                stages.back().status == ReplayStage::Status::kBet;
    bool short_alpha = !stages.empty() &&
                       stages.back().status == ReplayStage::Status::kStopped;
    if (done || !short_alpha || (available && n == *available)) return prefix;
    n *= 2;
  }
}

void write_capital_csv(std::ostream& os, const BitString& alpha,
                       const std::vector<std::pair<std::size_t, Rational>>& trace) {
  os << "n,alpha_bit,e\n";
  for (const auto& [n, value] : trace) {
    os << n << ',' << (n ? std::to_string(alpha.at(n)) : "") << ','
       << to_string(value) << "\n";
  }
}

void write_replay_csv(std::ostream& os, const std::vector<ReplayStage>& stages) {
  os << "s,status,totality_segment,expected_first,expected_second,decoded_total,t,"
        "alpha_segment,expected_bit,consumed,note\n";
  for (const auto& r : stages) {
    os << r.s << ',' << to_string(r.status) << ',' << r.totality_segment.str()
       << ',' << r.expected_totality.first.str() << ','
       << r.expected_totality.second.str() << ','
       << (r.decoded_total ? (*r.decoded_total ? "1" : "0") : "") << ','
       << (r.t ? std::to_string(*r.t) : "") << ',' << r.alpha_segment.str() << ','
       << (r.expected_bit ? std::to_string(*r.expected_bit) : "") << ','
       << r.consumed << ',' << r.note << "\n";
  }
}

DecodeSummary write_decode(const Scenario& sc, const BitString& beta,
                           std::uint64_t alpha_length, const std::filesystem::path& out) {
  auto ctx = DecoderContext::from_scenario(sc);
  auto alpha = alpha_length ? sc.alpha.prefix(alpha_length)
                            : alpha_for_replay(sc, beta, ctx);
  auto stages = replay(alpha, beta, ctx);
  std::uint64_t t_max = 0;
  for (const auto& r : stages) {
    if (r.t && r.status == ReplayStage::Status::kBet) t_max = std::max(t_max, *r.t);
  }
  if (!alpha_length) alpha = alpha.prefix(std::min<std::uint64_t>(t_max, alpha.size()));
  std::filesystem::create_directories(out);
  {
    std::ofstream os(out / "replay.csv");
    write_replay_csv(os, stages);
  }
  auto trace = capital_trace(alpha, beta, ctx);
  {
    std::ofstream os(out / "capital.csv");
    write_capital_csv(os, alpha, trace);
  }
  DecodeSummary result;
  result.final_capital = trace.back().second;
  result.flags = decode_totality(beta, ctx, alpha);
  return result;
}

}  // namespace crlab
