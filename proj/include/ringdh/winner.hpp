#pragma once

// Turning an agreed key into a lottery outcome: SHA-256 over the key's
// minimal big-endian bytes, then either low-bit extraction or an exact
// split of [0, 1) into equal half-open intervals.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <openssl/sha.h>

#include "ringdh/error.hpp"
#include "ringdh/modmath.hpp"
#include "ringdh/outcome.hpp"

namespace ringdh {

using Digest = std::array<std::uint8_t, 32>;

inline Digest sha256(std::span<const std::uint8_t> bytes) {
  Digest out{};
  SHA256(bytes.data(), bytes.size(), out.data());
  return out;
}

inline std::string digest_hex(const Digest& d) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (auto b : d) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

inline BigInt digest_value(const Digest& d) {
  BigInt v = 0;
  for (auto b : d) v = (v << 8) | b;
  return v;
}

inline Digest key_digest(const Element& key) { return sha256(to_bytes_be(key)); }

/// Low `bits` bits of the digest (bit 0 is the low bit of the last byte).
inline std::uint64_t digest_low_bits(const Digest& d, unsigned bits) {
  if (bits < 1 || bits > 64) throw Error(Errc::InvalidArgument, "can extract 1..64 low bits");
  std::uint64_t v = 0;
  for (unsigned i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(d[31 - i]) << (8 * i);
  return bits == 64 ? v : v & ((std::uint64_t{1} << bits) - 1);
}

struct Winner {
  std::uint64_t index = 0;  // 1-based
  friend bool operator==(const Winner&, const Winner&) = default;
};
struct Repeat {
  friend bool operator==(const Repeat&, const Repeat&) = default;
};
using WinnerOutcome = std::variant<Winner, Repeat>;

/// 00 repeats; 01, 10, 11 pick players 1, 2, 3.
inline WinnerOutcome outcome_from_two_bits(std::uint64_t t) {
  if (t == 0) return Repeat{};
  return Winner{t};
}

inline WinnerOutcome select_winner_3(const Digest& d) { return outcome_from_two_bits(digest_low_bits(d, 2)); }
inline WinnerOutcome select_winner_3(const Element& key) { return select_winner_3(key_digest(key)); }

/// 2^k players: the low k bits index a player directly, so no repeat.
inline Winner select_winner_pow2(const Digest& d, unsigned k) {
  if (k < 1 || k > 63) throw Error(Errc::InvalidArgument, "k must be in [1, 63]");
  return Winner{digest_low_bits(d, k) + 1};
}
inline Winner select_winner_pow2(const Element& key, unsigned k) { return select_winner_pow2(key_digest(key), k); }

/// Attempt 0 hashes the bare key bytes; attempt i >= 1 appends i as an
/// 8-byte big-endian counter.
inline Digest attempt_digest(const Element& key, std::uint64_t attempt) {
  auto bytes = to_bytes_be(key);
  if (attempt > 0) {
    for (int shift = 56; shift >= 0; shift -= 8) bytes.push_back(static_cast<std::uint8_t>(attempt >> shift));
  }
  return sha256(bytes);
}

struct RetryResult {
  Winner winner;
  std::uint64_t attempts = 0;
};

inline RetryResult select_with_retry(const Element& key, std::uint64_t max_attempts) {
  if (max_attempts < 1) throw Error(Errc::InvalidArgument, "need at least one attempt");
  for (std::uint64_t i = 0; i < max_attempts; ++i) {
    auto outcome = select_winner_3(attempt_digest(key, i));
    if (auto* w = std::get_if<Winner>(&outcome)) return {*w, i + 1};
  }
  throw Error(Errc::Exhausted, std::to_string(max_attempts) + " consecutive repeat outcomes");
}

/// Exact value in [0, 1).
class UnitValue {
 public:
  explicit UnitValue(Rational r) : r_(std::move(r)) {
    if (r_ < 0 || r_ >= 1) throw Error(Errc::InvalidArgument, "unit value must lie in [0, 1)");
  }
  const Rational& value() const { return r_; }

 private:
  Rational r_;
};

inline UnitValue uniform_map(const Digest& d) { return UnitValue(Rational(digest_value(d), BigInt(1) << 256)); }
inline UnitValue uniform_map(const Element& key) { return uniform_map(key_digest(key)); }

/// The i (1-based) with (i-1)/n <= R < i/n, decided exactly.
inline std::uint64_t range_assign(const UnitValue& r, std::uint64_t n) {
  if (n < 1) throw Error(Errc::InvalidArgument, "need at least one player");
  const Rational scaled = r.value() * n;
  const BigInt whole = boost::multiprecision::numerator(scaled) / boost::multiprecision::denominator(scaled);
  return static_cast<std::uint64_t>(whole) + 1;
}

}  // namespace ringdh
