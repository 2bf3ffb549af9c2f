#pragma once

// Safe extensions: segments y of length i + 2 with d(xy) / d(x) < 1 + 2^-i.
// For every martingale d with d(x) > 0 at least two exist, and the
// construction encodes one bit by choosing the first or second of them.

#include <string>
#include <utility>
#include <vector>

#include "crlab/bitstring.hpp"
#include "crlab/kernels.hpp"
#include "crlab/martingale.hpp"
#include "crlab/rational.hpp"

namespace crlab {

// Raised when fewer than two safe extensions exist, which means the
// martingale is not fair around x.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

// Exact form of d(xy) < (1 + 2^-i) d(x): d(xy) * 2^i < (2^i + 1) * d(x).
inline bool is_safe(const Rational& at_extension, const Rational& at_base,
                    std::size_t i) {
  Rational scale = pow2(static_cast<long>(i));
  return at_extension * scale < (scale + 1) * at_base;
}

// Generic form: `eval` maps a bit string to its value (and may throw).
// Returns the safe segments in lexicographic order.
template <class Eval>
std::vector<BitString> safe_extensions_with(
    Eval&& eval, const BitString& x, std::size_t i,
    kernels::Execution exec = kernels::Execution::kParallel) {
  Rational base = eval(x);
  if (base == 0) {
    throw RangeError("safe_extensions: d(\"" + x.str() + "\") = 0");
  }
  const std::size_t length = i + 2;
  auto segments = strings_of_length(length);
  auto hits = kernels::select(
      segments.size(),
      [&](std::size_t k) { return is_safe(eval(x.concat(segments[k])), base, i); },
      exec);
  std::vector<BitString> out;
  out.reserve(hits.size());
  for (auto k : hits) out.push_back(segments[k]);
  return out;
}

inline std::vector<BitString> safe_extensions(
    const Martingale& d, const BitString& x, std::size_t i,
    kernels::Execution exec = kernels::Execution::kParallel) {
  return safe_extensions_with([&](const BitString& z) { return d.eval(z); }, x,
                              i, exec);
}

// The lexicographically first and second safe segments, found by a serial
// scan that stops as soon as two are found.
template <class Eval>
std::pair<BitString, BitString> first_two_with(Eval&& eval, const BitString& x,
                                               std::size_t i) {
  Rational base = eval(x);
  if (base == 0) throw RangeError("first_two: d(\"" + x.str() + "\") = 0");
  const std::size_t length = i + 2;
  std::vector<BitString> found;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << length) && found.size() < 2;
       ++v) {
    BitString y = BitString::from_value(length, v);
    if (is_safe(eval(x.concat(y)), base, i)) found.push_back(std::move(y));
  }
  if (found.size() < 2) {
    throw InconsistencyError(
        "fewer than two safe extensions of \"" + x.str() + "\" at i=" +
        std::to_string(i) + " (found " + std::to_string(found.size()) +
        "); d(x) = " + to_string(base) + ", so d is not fair below x");
  }
  return {found[0], found[1]};
}

inline std::pair<BitString, BitString> first_two(const Martingale& d,
                                                 const BitString& x,
                                                 std::size_t i) {
  return first_two_with([&](const BitString& z) { return d.eval(z); }, x, i);
}

}  // namespace crlab
