#include "crlab/bivariate.hpp"

#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "crlab/kernels.hpp"

namespace crlab {
namespace {

class TableImpl final : public detail::BivariateImpl {
 public:
  TableImpl(std::size_t dx, std::size_t dy,
            std::vector<std::vector<Rational>> values)
      : dx_(dx), dy_(dy), values_(std::move(values)) {}
  Rational eval(const BitString& x, const BitString& y) const override {
    return values_[heap_index(x.prefix(dx_))][heap_index(y.prefix(dy_))];
  }
  std::string describe() const override {
    return "table(" + std::to_string(dx_) + "x" + std::to_string(dy_) + ")";
  }

 private:
  std::size_t dx_, dy_;
  std::vector<std::vector<Rational>> values_;
};

class FunctionImpl final : public detail::BivariateImpl {
 public:
  FunctionImpl(std::function<Rational(const BitString&, const BitString&)> fn,
               std::string desc)
      : fn_(std::move(fn)), desc_(std::move(desc)) {}
  Rational eval(const BitString& x, const BitString& y) const override {
    return fn_(x, y);
  }
  std::string describe() const override { return desc_; }

 private:
  std::function<Rational(const BitString&, const BitString&)> fn_;
  std::string desc_;
};

class FromUnivariateImpl final : public detail::BivariateImpl {
 public:
  explicit FromUnivariateImpl(Martingale f) : f_(std::move(f)) {}

  Rational eval(const BitString& x, const BitString& y) const override {
    if (x.size() == y.size()) return f_.eval(interleave(x, y));
    std::string key = x.str() + "|" + y.str();
    {
      std::shared_lock lock(mu_);
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    Rational v = x.size() < y.size()
                     ? Rational((eval(x.with(0), y) + eval(x.with(1), y)) / 2)
                     : Rational((eval(x, y.with(0)) + eval(x, y.with(1))) / 2);
    std::unique_lock lock(mu_);
    memo_.emplace(std::move(key), v);
    return v;
  }
  std::string describe() const override {
    return "from_univariate(" + f_.describe() + ")";
  }

 private:
  Martingale f_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::string, Rational> memo_;
};

}  // namespace

BivariateMartingale BivariateMartingale::table(
    std::size_t depth_x, std::size_t depth_y,
    std::vector<std::vector<Rational>> values) {
  if (values.size() != (std::size_t{2} << depth_x) - 1) {
    throw RangeError("bivariate table: wrong number of rows");
  }
  for (const auto& row : values) {
    if (row.size() != (std::size_t{2} << depth_y) - 1) {
      throw RangeError("bivariate table: wrong number of columns");
    }
  }
  return BivariateMartingale(
      std::make_shared<TableImpl>(depth_x, depth_y, std::move(values)));
}

BivariateMartingale BivariateMartingale::product(Martingale f, Martingale h) {
  std::string desc = "product(" + f.describe() + ", " + h.describe() + ")";
  return from_function(
      [f = std::move(f), h = std::move(h)](const BitString& x,
                                           const BitString& y) {
        return Rational(f.eval(x) * h.eval(y));
      },
      std::move(desc));
}

BivariateMartingale BivariateMartingale::from_function(
    std::function<Rational(const BitString&, const BitString&)> fn,
    std::string description) {
  return BivariateMartingale(
      std::make_shared<FunctionImpl>(std::move(fn), std::move(description)));
}

BivariateReport validate_bivariate(const BivariateMartingale& g,
                                   std::size_t depth_x, std::size_t depth_y) {
  using Status = BivariateReport::Status;
  auto xs = strings_up_to(depth_x);
  auto ys = strings_up_to(depth_y);
  // One row of the rectangle per task.
  std::vector<std::vector<Rational>> grid;
  try {
    grid = kernels::map(std::span<const BitString>(xs), [&](const BitString& x) {
      std::vector<Rational> row;
      row.reserve(ys.size());
      for (const auto& y : ys) {
        try {
          row.push_back(g.eval(x, y));
        } catch (const EvaluationError& e) {
          throw EvaluationError(x.str() + "," + y.str(), e.what());
        }
      }
      return row;
    });
  } catch (const EvaluationError& e) {
    return {Status::kEvaluationFailed, {}, {}, e.what()};
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const Rational& v = grid[i][j];
      auto where = "(\"" + xs[i].str() + "\", \"" + ys[j].str() + "\")";
      if (v < 0) {
        return {Status::kNegative, xs[i], ys[j], "negative value at " + where};
      }
      if (xs[i].size() < depth_x &&
          grid[2 * i + 1][j] + grid[2 * i + 2][j] != 2 * v) {
        return {Status::kUnfairInX, xs[i], ys[j],
                "first-argument fairness fails at " + where + ": " +
                    to_string(grid[2 * i + 1][j]) + " + " +
                    to_string(grid[2 * i + 2][j]) + " != 2*" + to_string(v)};
      }
      if (ys[j].size() < depth_y &&
          grid[i][2 * j + 1] + grid[i][2 * j + 2] != 2 * v) {
        return {Status::kUnfairInY, xs[i], ys[j],
                "second-argument fairness fails at " + where + ": " +
                    to_string(grid[i][2 * j + 1]) + " + " +
                    to_string(grid[i][2 * j + 2]) + " != 2*" + to_string(v)};
      }
    }
  }
  return {};
}

BivariateMartingale from_univariate(const Martingale& f) {
  return BivariateMartingale(std::make_shared<FromUnivariateImpl>(f));
}

Martingale to_univariate(const BivariateMartingale& g) {
  return Martingale::from_function(
      [g](const BitString& z) {
        auto [x, y] = split(z);
        return g.eval(x, y);
      },
      "to_univariate(" + g.describe() + ")");
}

BivariateMartingale bivariate_savings(const BivariateMartingale& g) {
  if (g.eval(BitString(), BitString()) == 0) {
    throw RangeError("bivariate savings needs g(empty, empty) > 0");
  }
  return from_univariate(savings_transform(to_univariate(g)));
}

}  // namespace crlab
