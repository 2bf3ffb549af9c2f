#include "crlab/martingale.hpp"

#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include "crlab/kernels.hpp"

namespace crlab {
namespace {

class ConstantImpl final : public detail::MartingaleImpl {
 public:
  explicit ConstantImpl(Rational v) : value_(std::move(v)) {}
  Rational eval(const BitString&) const override { return value_; }
  std::string describe() const override {
    return "const(" + to_string(value_) + ")";
  }

 private:
  Rational value_;
};

class TableImpl final : public detail::MartingaleImpl {
 public:
  TableImpl(std::size_t depth, std::vector<Rational> values)
      : depth_(depth), values_(std::move(values)) {}
  Rational eval(const BitString& x) const override {
    return values_[heap_index(x.prefix(depth_))];
  }
  std::string describe() const override {
    return "table(depth " + std::to_string(depth_) + ")";
  }
  std::size_t depth() const { return depth_; }

 private:
  std::size_t depth_;
  std::vector<Rational> values_;
};

class SumImpl final : public detail::MartingaleImpl {
 public:
  explicit SumImpl(std::vector<std::pair<Rational, Martingale>> terms)
      : terms_(std::move(terms)) {}
  Rational eval(const BitString& x) const override {
    Rational total = 0;
    for (const auto& [c, m] : terms_) {
      if (c != 0) total += c * m.eval(x);
    }
    return total;
  }
  std::string describe() const override {
    std::string out = "sum(";
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (i) out += " + ";
      out += to_string(terms_[i].first) + "*" + terms_[i].second.describe();
    }
    return out + ")";
  }
  const std::vector<std::pair<Rational, Martingale>>& terms() const {
    return terms_;
  }

 private:
  std::vector<std::pair<Rational, Martingale>> terms_;
};

class ProgramImpl final : public detail::MartingaleImpl {
 public:
  ProgramImpl(mdsl::Program p, BitSource oracle, std::uint64_t budget,
              std::string name)
      : program_(std::move(p)),
        oracle_(std::move(oracle)),
        budget_(budget),
        name_(std::move(name)) {}

  mdsl::EvalOutcome outcome(const BitString& x) const {
    {
      std::shared_lock lock(mu_);
      if (auto it = memo_.find(x); it != memo_.end()) return it->second;
    }
    auto out = mdsl::evaluate(program_, x, oracle_, budget_);
    std::unique_lock lock(mu_);
    return memo_.emplace(x, std::move(out)).first->second;
  }

  Rational eval(const BitString& x) const override {
    auto out = outcome(x);
    if (!out.ok()) throw EvaluationError(x.str(), name_ + ": " + out.describe());
    return out.value();
  }
  std::string describe() const override {
    return name_ + "[" + mdsl::print(program_) + "]";
  }

 private:
  mdsl::Program program_;
  BitSource oracle_;
  std::uint64_t budget_;
  std::string name_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<BitString, mdsl::EvalOutcome> memo_;
};

class FunctionImpl final : public detail::MartingaleImpl {
 public:
  FunctionImpl(std::function<Rational(const BitString&)> fn, std::string desc)
      : fn_(std::move(fn)), desc_(std::move(desc)) {}
  Rational eval(const BitString& x) const override { return fn_(x); }
  std::string describe() const override { return desc_; }

 private:
  std::function<Rational(const BitString&)> fn_;
  std::string desc_;
};

// Ratio f(child)/f(parent), or 1 below a zero-capital node.
Rational edge_ratio(const Rational& parent, const Rational& child) {
  return parent == 0 ? Rational(1) : Rational(child / parent);
}

class SavingsImpl final : public detail::MartingaleImpl {
 public:
  explicit SavingsImpl(Martingale inner) : inner_(std::move(inner)) {}
  Rational eval(const BitString& x) const override {
    return savings_state(inner_, x).value();
  }
  std::string describe() const override {
    return "savings(" + inner_.describe() + ")";
  }

 private:
  Martingale inner_;
};

}  // namespace

Martingale Martingale::constant(Rational value) {
  return Martingale(std::make_shared<ConstantImpl>(std::move(value)));
}

Martingale Martingale::table(std::size_t depth, std::vector<Rational> values) {
  if (values.size() != (std::size_t{2} << depth) - 1) {
    throw RangeError("table of depth " + std::to_string(depth) + " needs " +
                     std::to_string((std::size_t{2} << depth) - 1) +
                     " values, got " + std::to_string(values.size()));
  }
  return Martingale(std::make_shared<TableImpl>(depth, std::move(values)));
}

Martingale Martingale::sum(std::vector<std::pair<Rational, Martingale>> terms) {
  return Martingale(std::make_shared<SumImpl>(std::move(terms)));
}

Martingale Martingale::program(mdsl::Program p, BitSource oracle,
                               std::uint64_t budget, std::string name) {
  return Martingale(std::make_shared<ProgramImpl>(
      std::move(p), std::move(oracle), budget, std::move(name)));
}

Martingale Martingale::from_function(
    std::function<Rational(const BitString&)> fn, std::string description) {
  return Martingale(
      std::make_shared<FunctionImpl>(std::move(fn), std::move(description)));
}

std::optional<mdsl::EvalOutcome> Martingale::outcome(const BitString& x) const {
  if (auto* p = dynamic_cast<const ProgramImpl*>(impl_.get())) {
    return p->outcome(x);
  }
  return std::nullopt;
}

std::optional<std::size_t> Martingale::table_depth() const {
  if (auto* t = dynamic_cast<const TableImpl*>(impl_.get())) return t->depth();
  return std::nullopt;
}

std::vector<Rational> tabulate(const Martingale& m, std::size_t depth) {
  auto points = strings_up_to(depth);
  return kernels::map(std::span<const BitString>(points),
                      [&](const BitString& x) { return m.eval(x); });
}

FairnessReport validate_fairness(const Martingale& m, std::size_t depth) {
  using Status = FairnessReport::Status;
  auto points = strings_up_to(depth);
  std::vector<Rational> values;
  try {
    values = kernels::map(std::span<const BitString>(points),
                          [&](const BitString& x) { return m.eval(x); });
  } catch (const EvaluationError& e) {
    return {Status::kEvaluationFailed, BitString::parse(e.input()), e.what()};
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (values[i] < 0) {
      return {Status::kNegative, points[i],
              "negative value " + to_string(values[i]) + " at \"" +
                  points[i].str() + "\""};
    }
    if (points[i].size() < depth) {
      const auto& c0 = values[2 * i + 1];
      const auto& c1 = values[2 * i + 2];
      if (c0 + c1 != 2 * values[i]) {
        return {Status::kUnfair, points[i],
                "unfair at \"" + points[i].str() + "\": " + to_string(c0) +
                    " + " + to_string(c1) + " != 2*" + to_string(values[i])};
      }
    }
  }
  return {};
}

Martingale mix(const Martingale& d, const Martingale& component,
               const Rational& coefficient) {
  std::vector<std::pair<Rational, Martingale>> terms;
  if (auto* s = dynamic_cast<const SumImpl*>(&d.impl())) {
    terms = s->terms();
  } else {
    terms.emplace_back(1, d);
  }
  terms.emplace_back(coefficient, component);
  return Martingale::sum(std::move(terms));
}

SavingsState savings_state(const Martingale& f, const BitString& x) {
  Rational prev = f.eval(BitString());
  if (prev == 0) throw RangeError("savings transform needs f(empty) > 0");
  SavingsState st{1, 1};
  BitString path;
  for (std::size_t k = 1; k <= x.size(); ++k) {
    path.push_back(x.at(k));
    Rational cur = f.eval(path);
    st.active *= edge_ratio(prev, cur);
    if (st.active > 1) {
      st.banked += st.active - 1;
      st.active = 1;
    }
    prev = std::move(cur);
  }
  return st;
}

Martingale savings_transform(const Martingale& f) {
  if (f.eval(BitString()) == 0) {
    throw RangeError("savings transform needs f(empty) > 0");
  }
  return Martingale(std::make_shared<SavingsImpl>(f));
}

std::pair<Martingale, Martingale> decompose_odd_even(const Martingale& f,
                                                     std::size_t depth) {
  auto values = tabulate(f, depth);
  std::vector<Rational> odd(values.size()), even(values.size());
  odd[0] = values[0];
  even[0] = 1;
  for (std::size_t i = 1; i < values.size(); ++i) {
    std::size_t parent = (i - 1) / 2;
    // Heap index i sits at depth floor(log2(i+1)); that depth is the 1-based
    // position of the last bit.
    std::size_t position = 0;
    for (std::size_t v = i + 1; v > 1; v >>= 1) ++position;
    Rational r = edge_ratio(values[parent], values[i]);
    if (position % 2 == 1) {
      odd[i] = odd[parent] * r;
      even[i] = even[parent];
    } else {
      odd[i] = odd[parent];
      even[i] = even[parent] * r;
    }
  }
  return {Martingale::table(depth, std::move(odd)),
          Martingale::table(depth, std::move(even))};
}

Martingale fix_oracle(const mdsl::Program& p, const BitSource& oracle,
                      std::uint64_t budget) {
  return Martingale::program(p, oracle, budget);
}

void write_table(std::ostream& os, const Martingale& m, std::size_t depth) {
  auto points = strings_up_to(depth);
  auto values = tabulate(m, depth);
  for (std::size_t i = 0; i < points.size(); ++i) {
    os << (points[i].empty() ? "-" : points[i].str()) << ' '
       << to_string(values[i]) << '\n';
  }
}

Martingale read_table(std::istream& is) {
  std::map<BitString, Rational> entries;
  std::string line;
  std::size_t lineno = 0, depth = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string bits, value, extra;
    if (!(ls >> bits)) continue;
    if (!(ls >> value) || (ls >> extra)) {
      throw FormatError("table line " + std::to_string(lineno) +
                        ": expected '<bits> <num>/<den>'");
    }
    BitString x = bits == "-" ? BitString() : BitString::parse(bits);
    Rational v = parse_rational(value);
    if (v < 0) {
      throw FormatError("table line " + std::to_string(lineno) +
                        ": negative value");
    }
    if (!entries.emplace(x, v).second) {
      throw FormatError("table line " + std::to_string(lineno) +
                        ": duplicate entry for \"" + x.str() + "\"");
    }
    depth = std::max(depth, x.size());
  }
  if (entries.size() != (std::size_t{2} << depth) - 1) {
    throw FormatError("table of depth " + std::to_string(depth) +
                      " is incomplete: " + std::to_string(entries.size()) +
                      " entries");
  }
  std::vector<Rational> values;
  values.reserve(entries.size());
  for (auto& [x, v] : entries) values.push_back(v);  // map order == heap order
  auto m = Martingale::table(depth, std::move(values));
  auto report = validate_fairness(m, depth);
  if (!report.passed()) throw FormatError("table rejected: " + report.message);
  return m;
}

}  // namespace crlab
