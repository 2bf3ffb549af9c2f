#include <algorithm>
#include <charconv>

#include "crlab/bit_source.hpp"
#include "crlab/bitstring.hpp"
#include "crlab/rational.hpp"

namespace crlab {

BitString BitString::parse(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '0' && text[i] != '1') {
      throw FormatError("invalid bit '" + std::string(1, text[i]) +
                        "' at offset " + std::to_string(i));
    }
  }
  return BitString(std::string(text));
}

BitString BitString::from_value(std::size_t length, std::uint64_t value) {
  std::string bits(length, '0');
  for (std::size_t i = 0; i < length && i < 64; ++i) {
    if ((value >> i) & 1U) bits[length - 1 - i] = '1';
  }
  return BitString(std::move(bits));
}

int BitString::at(std::size_t position) const {
  if (position < 1 || position > bits_.size()) {
    throw RangeError("bit position " + std::to_string(position) +
                     " outside 1.." + std::to_string(bits_.size()));
  }
  return bits_[position - 1] == '1';
}

BitString BitString::prefix(std::size_t n) const {
  return BitString(bits_.substr(0, std::min(n, bits_.size())));
}

BitString BitString::slice(std::size_t from, std::size_t count) const {
  if (from < 1 || from - 1 + count > bits_.size()) {
    throw RangeError("slice out of range");
  }
  return BitString(bits_.substr(from - 1, count));
}

BitString BitString::parent() const {
  if (bits_.empty()) throw RangeError("the empty string has no parent");
  return BitString(bits_.substr(0, bits_.size() - 1));
}

std::uint64_t BitString::value() const {
  if (bits_.size() > 64) throw RangeError("bit string longer than 64 bits");
  std::uint64_t v = 0;
  for (char c : bits_) v = (v << 1) | static_cast<std::uint64_t>(c == '1');
  return v;
}

BitString lex_nth(std::size_t length, std::uint64_t n) {
  bool in_range = n >= 1 && (length >= 64 || n <= (std::uint64_t{1} << length));
  if (!in_range) {
    throw RangeError("lex_nth: n=" + std::to_string(n) +
                     " outside 1..2^" + std::to_string(length));
  }
  return BitString::from_value(length, n - 1);
}

BitString interleave(const BitString& x, const BitString& y) {
  if (x.size() != y.size() && x.size() != y.size() + 1) {
    throw RangeError("interleave: lengths " + std::to_string(x.size()) +
                     " and " + std::to_string(y.size()) + " are incompatible");
  }
  BitString z;
  for (std::size_t k = 1; k <= x.size(); ++k) {
    z.push_back(x.at(k));
    if (k <= y.size()) z.push_back(y.at(k));
  }
  return z;
}

std::pair<BitString, BitString> split(const BitString& z) {
  BitString odd, even;
  for (std::size_t k = 1; k <= z.size(); ++k) {
    (k % 2 == 1 ? odd : even).push_back(z.at(k));
  }
  return {odd, even};
}

std::vector<BitString> strings_of_length(std::size_t length) {
  if (length >= 40) throw RangeError("refusing to enumerate 2^" +
                                     std::to_string(length) + " strings");
  std::vector<BitString> out;
  out.reserve(std::size_t{1} << length);
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << length); ++v) {
    out.push_back(BitString::from_value(length, v));
  }
  return out;
}

std::vector<BitString> strings_up_to(std::size_t depth) {
  std::vector<BitString> out;
  out.reserve((std::size_t{2} << depth) - 1);
  for (std::size_t n = 0; n <= depth; ++n) {
    auto level = strings_of_length(n);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational parse_rational(std::string_view text) {
  auto is_digits = [](std::string_view s) {
    return !s.empty() &&
           std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && body.front() == '-') {
    negative = true;
    body.remove_prefix(1);
  }
  auto slash = body.find('/');
  std::string_view num = body.substr(0, slash);
  std::string_view den = slash == std::string_view::npos ? std::string_view("1")
                                                         : body.substr(slash + 1);
  if (!is_digits(num) || !is_digits(den)) {
    throw FormatError("not a rational literal: '" + std::string(text) + "'");
  }
  mpz_class n{std::string(num)}, d{std::string(den)};
  if (d == 0) throw FormatError("zero denominator in '" + std::string(text) + "'");
  Rational q(negative ? mpz_class(-n) : n, d);
  q.canonicalize();
  return q;
}

Rational pow2(long k) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(k < 0 ? -k : k));
  return k >= 0 ? Rational(p) : Rational(mpz_class(1), p);
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

BitSource BitSource::explicit_bits(BitString bits) {
  return BitSource(Explicit{std::move(bits)});
}

BitSource BitSource::seeded(std::uint64_t seed,
                            std::optional<std::uint64_t> limit) {
  return BitSource(Seeded{seed, limit});
}

std::optional<std::uint64_t> BitSource::length() const {
  if (auto* e = std::get_if<Explicit>(&kind_)) return e->bits.size();
  return std::get<Seeded>(kind_).limit;
}

std::optional<int> BitSource::try_bit(std::uint64_t position) const {
  if (!has(position)) return std::nullopt;
  if (auto* e = std::get_if<Explicit>(&kind_)) return e->bits.at(position);
  const auto& s = std::get<Seeded>(kind_);
  return static_cast<int>(splitmix64_mix(s.seed + position * kGolden) >> 63);
}

int BitSource::bit(std::uint64_t position) const {
  if (auto b = try_bit(position)) return *b;
  throw OracleRangeError(position);
}

BitSource BitSource::truncated(std::uint64_t n) const {
  if (auto* e = std::get_if<Explicit>(&kind_)) {
    return explicit_bits(e->bits.prefix(n));
  }
  const auto& s = std::get<Seeded>(kind_);
  return seeded(s.seed, s.limit ? std::min(*s.limit, n) : n);
}

BitString BitSource::prefix(std::uint64_t n) const {
  BitString out;
  for (std::uint64_t k = 1; k <= n; ++k) out.push_back(bit(k));
  return out;
}

std::string BitSource::describe() const {
  if (auto* e = std::get_if<Explicit>(&kind_)) {
    return "explicit(" + e->bits.str() + ")";
  }
  const auto& s = std::get<Seeded>(kind_);
  return "seeded(" + std::to_string(s.seed) +
         (s.limit ? ", limit " + std::to_string(*s.limit) : std::string()) + ")";
}

}  // namespace crlab
