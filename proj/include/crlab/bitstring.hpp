#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crlab/error.hpp"

namespace crlab {

// A finite string over {0,1}. Positions are 1-based: at(1) is the first bit.
// Serialized as ASCII '0'/'1'; the empty string serializes as "".
class BitString {
 public:
  BitString() = default;

  // Throws FormatError on characters other than '0' and '1'.
  static BitString parse(std::string_view text);

  // The string of the given length whose binary value is `value`.
  static BitString from_value(std::size_t length, std::uint64_t value);

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }

  // 1-based access; throws RangeError outside [1, size()].
  int at(std::size_t position) const;

  void push_back(int bit) { bits_.push_back(bit ? '1' : '0'); }
  void append(const BitString& other) { bits_ += other.bits_; }

  BitString with(int bit) const {
    BitString out = *this;
    out.push_back(bit);
    return out;
  }
  BitString concat(const BitString& other) const {
    BitString out = *this;
    out.append(other);
    return out;
  }

  // First n bits; n is clamped to size().
  BitString prefix(std::size_t n) const;
  // Bits from 1-based position `from` through `from + count - 1`.
  BitString slice(std::size_t from, std::size_t count) const;
  // The string with the last bit removed; requires !empty().
  BitString parent() const;

  bool is_prefix_of(const BitString& other) const {
    return bits_.size() <= other.bits_.size() &&
           other.bits_.compare(0, bits_.size(), bits_) == 0;
  }

  // Binary value; requires size() <= 64.
  std::uint64_t value() const;

  const std::string& str() const { return bits_; }

  // Length first, then lexicographic: for equal lengths this is the numeric
  // order of the binary value.
  friend std::strong_ordering operator<=>(const BitString& a,
                                          const BitString& b) {
    if (auto c = a.bits_.size() <=> b.bits_.size(); c != 0) return c;
    return a.bits_.compare(b.bits_) <=> 0;
  }
  friend bool operator==(const BitString&, const BitString&) = default;

  friend std::ostream& operator<<(std::ostream& os, const BitString& b) {
    return os << '"' << b.bits_ << '"';
  }

 private:
  explicit BitString(std::string bits) : bits_(std::move(bits)) {}
  std::string bits_;
};

// The n-th (1-based) string of the given length in lexicographic order.
// Requires 1 <= n <= 2^length; throws RangeError otherwise.
BitString lex_nth(std::size_t length, std::uint64_t n);

// x1 y1 x2 y2 ...; requires |x| == |y| or |x| == |y| + 1.
BitString interleave(const BitString& x, const BitString& y);

// (odd-position bits, even-position bits).
std::pair<BitString, BitString> split(const BitString& z);

// All strings of length <= depth, ordered by length then lexicographically.
// The i-th entry is the string with heap index i (see heap_index).
std::vector<BitString> strings_up_to(std::size_t depth);

// All strings of exactly the given length, lexicographic.
std::vector<BitString> strings_of_length(std::size_t length);

// Position of x in strings_up_to(): 2^|x| - 1 + value(x).
inline std::size_t heap_index(const BitString& x) {
  return (std::size_t{1} << x.size()) - 1 + x.value();
}

}  // namespace crlab

template <>
struct std::hash<crlab::BitString> {
  std::size_t operator()(const crlab::BitString& b) const noexcept {
    return std::hash<std::string>{}(b.str());
  }
};
