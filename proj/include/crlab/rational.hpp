#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace crlab {

// Exact arbitrary-precision rational. Always canonical (lowest terms,
// positive denominator) as long as values are built through the helpers
// below or through GMP arithmetic.
using Rational = mpq_class;

// "num/den" in lowest terms; integers are written "n/1".
std::string to_string(const Rational& q);

// Accepts "n", "n/d" and a leading '-'. Throws FormatError otherwise or on a
// zero denominator.
Rational parse_rational(std::string_view text);

// n / d in lowest terms; d != 0.
inline Rational ratio(long n, long d) {
  Rational q(n, d);
  q.canonicalize();
  return q;
}

// 2^k for any integer k.
Rational pow2(long k);

}  // namespace crlab
