#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "crlab/bitstring.hpp"

namespace crlab {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used for seeded bit sources
// and the seeded generators in the test utilities; fixed so that every trace
// is reproducible across platforms and standard libraries.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Sequential SplitMix64 stream.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64_mix(state_);
  }
  // Uniform-ish draw in [0, bound); bound > 0. Modulo bias is irrelevant for
  // test-data generation and keeps the stream platform-independent.
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

 private:
  std::uint64_t state_;
};

// A lazily queried, deterministic infinite-or-finite bit sequence (1-based).
//
// explicit: the bits of a fixed BitString.
// seeded:   bit k is the top bit of splitmix64_mix(seed + k * 0x9E3779B97F4A7C15),
//           i.e. the k-th output of SplitMix64 seeded with `seed`; optionally
//           limited to `limit` positions.
class BitSource {
 public:
  static BitSource explicit_bits(BitString bits);
  static BitSource seeded(std::uint64_t seed,
                          std::optional<std::uint64_t> limit = std::nullopt);

  // Throws OracleRangeError past the available length.
  int bit(std::uint64_t position) const;
  std::optional<int> try_bit(std::uint64_t position) const;

  // Number of available positions, or nullopt when unbounded.
  std::optional<std::uint64_t> length() const;
  bool has(std::uint64_t position) const {
    auto n = length();
    return position >= 1 && (!n || position <= *n);
  }

  // The same source restricted to its first n positions.
  BitSource truncated(std::uint64_t n) const;

  // Bits 1..n; throws OracleRangeError if fewer are available.
  BitString prefix(std::uint64_t n) const;

  std::string describe() const;

 private:
  struct Explicit {
    BitString bits;
  };
  struct Seeded {
    std::uint64_t seed;
    std::optional<std::uint64_t> limit;
  };
  explicit BitSource(std::variant<Explicit, Seeded> kind)
      : kind_(std::move(kind)) {}

  std::variant<Explicit, Seeded> kind_;
};

}  // namespace crlab
