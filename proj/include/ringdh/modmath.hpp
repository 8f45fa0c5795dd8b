#pragma once

// Arbitrary-precision arithmetic over a prime field. Every other header in
// the library computes through these functions.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ringdh/error.hpp"

namespace ringdh {

using BigInt = boost::multiprecision::cpp_int;

/// A residue in [0, p). The modulus travels separately, in GroupParams.
using Element = BigInt;

inline constexpr unsigned kDefaultPrimalityRounds = 32;
inline constexpr std::uint64_t kDefaultFactorBudget = 1'000'000;

// ---------------------------------------------------------------------------
// Text and byte encodings

inline std::string to_decimal(const BigInt& v) { return v.str(); }

inline BigInt parse_decimal(std::string_view text) {
  if (text.empty() || text.size() > 4096) {
    throw Error(Errc::InvalidArgument, "empty or oversized decimal string");
  }
  BigInt out = 0;
  for (char c : text) {
    if (c < '0' || c > '9') {
      throw Error(Errc::InvalidArgument, "not a decimal digit in '" + std::string(text) + "'");
    }
    out = out * 10 + (c - '0');
  }
  return out;
}

/// Lowercase hex without leading zeros; zero is "0".
inline std::string to_hex(const BigInt& v) {
  if (v < 0) throw Error(Errc::InvalidArgument, "negative value has no hex encoding");
  if (v == 0) return "0";
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  BigInt rest = v;
  while (rest != 0) {
    out.push_back(kDigits[static_cast<unsigned>(rest & 0xf)]);
    rest >>= 4;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

/// Accepts only the form to_hex produces.
inline std::optional<BigInt> parse_hex_canonical(std::string_view text) {
  if (text.empty() || text.size() > 4096) return std::nullopt;
  if (text.size() > 1 && text.front() == '0') return std::nullopt;
  BigInt out = 0;
  for (char c : text) {
    unsigned d = 0;
    if (c >= '0' && c <= '9') {
      d = static_cast<unsigned>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      d = static_cast<unsigned>(c - 'a' + 10);
    } else {
      return std::nullopt;
    }
    out = (out << 4) | d;
  }
  return out;
}

/// Minimal big-endian bytes; zero encodes as a single 0x00 byte.
inline std::vector<std::uint8_t> to_bytes_be(const BigInt& v) {
  if (v < 0) throw Error(Errc::InvalidArgument, "negative value has no byte encoding");
  std::vector<std::uint8_t> out;
  BigInt rest = v;
  do {
    out.push_back(static_cast<std::uint8_t>(rest & 0xff));
    rest >>= 8;
  } while (rest != 0);
  std::reverse(out.begin(), out.end());
  return out;
}

inline BigInt from_bytes_be(const std::vector<std::uint8_t>& bytes) {
  BigInt out = 0;
  for (auto b : bytes) out = (out << 8) | b;
  return out;
}

// ---------------------------------------------------------------------------
// Field operations

/// Least non-negative residue of a (which may be negative).
inline BigInt mod_reduce(const BigInt& a, const BigInt& p) {
  BigInt r = a % p;
  if (r < 0) r += p;
  return r;
}

/// Square-and-multiply, O(log exponent) multiplications.
inline Element mod_pow(const Element& base, const BigInt& exponent, const BigInt& p) {
  if (p < 2) throw Error(Errc::InvalidArgument, "modulus must be at least 2");
  if (base < 0 || base >= p) throw Error(Errc::InvalidArgument, "base outside [0, p)");
  if (exponent < 0) throw Error(Errc::InvalidArgument, "negative exponent");

  BigInt result = 1 % p;
  BigInt square = base;
  const unsigned bits = exponent == 0 ? 0 : static_cast<unsigned>(boost::multiprecision::msb(exponent)) + 1;
  for (unsigned i = 0; i < bits; ++i) {
    if (boost::multiprecision::bit_test(exponent, i)) result = (result * square) % p;
    if (i + 1 < bits) square = (square * square) % p;
  }
  return result;
}

/// Inverse via the extended Euclidean algorithm.
inline Element mod_inv(const BigInt& a, const BigInt& p) {
  if (p < 2) throw Error(Errc::InvalidArgument, "modulus must be at least 2");
  BigInt r0 = p, r1 = mod_reduce(a, p);
  if (r1 == 0) throw Error(Errc::ZeroDivisor, to_decimal(a) + " has no inverse mod " + to_decimal(p));
  BigInt t0 = 0, t1 = 1;
  while (r1 != 0) {
    BigInt q = r0 / r1;
    BigInt r2 = r0 - q * r1;
    r0 = std::move(r1);
    r1 = std::move(r2);
    BigInt t2 = t0 - q * t1;
    t0 = std::move(t1);
    t1 = std::move(t2);
  }
  if (r0 != 1) throw Error(Errc::ZeroDivisor, to_decimal(a) + " is not a unit mod " + to_decimal(p));
  return mod_reduce(t0, p);
}

// ---------------------------------------------------------------------------
// Randomness

/// Uniform in [0, bound) by rejection sampling over msb(bound)+1 bits.
template <class Rng>
BigInt random_below(const BigInt& bound, Rng& rng) {
  if (bound <= 0) throw Error(Errc::InvalidArgument, "random_below needs a positive bound");
  const unsigned bits = static_cast<unsigned>(boost::multiprecision::msb(bound)) + 1;
  for (;;) {
    BigInt candidate = 0;
    unsigned filled = 0;
    while (filled < bits) {
      candidate = (candidate << 64) | BigInt(static_cast<std::uint64_t>(rng()));
      filled += 64;
    }
    candidate >>= (filled - bits);
    if (candidate < bound) return candidate;
  }
}

/// Uniform in [lo, hi].
template <class Rng>
BigInt random_in_range(const BigInt& lo, const BigInt& hi, Rng& rng) {
  if (hi < lo) throw Error(Errc::InvalidArgument, "empty random range");
  return lo + random_below(hi - lo + 1, rng);
}

// ---------------------------------------------------------------------------
// Primality and factoring

namespace detail {

inline bool trial_division_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint64_t d = 3; d * d <= n; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

inline const std::vector<unsigned>& small_primes() {
  static const std::vector<unsigned> primes = [] {
    std::vector<unsigned> out;
    for (unsigned n = 2; n < 2000; ++n) {
      if (trial_division_prime(n)) out.push_back(n);
    }
    return out;
  }();
  return primes;
}

inline bool miller_rabin_witness(const BigInt& n, const BigInt& a, const BigInt& d, unsigned s) {
  BigInt x = mod_pow(a, d, n);
  if (x == 1 || x == n - 1) return false;
  for (unsigned r = 1; r < s; ++r) {
    x = (x * x) % n;
    if (x == n - 1) return false;
  }
  return true;
}

}  // namespace detail

/// Deterministic below 2^16 (trial division); Miller-Rabin above, with
/// witnesses drawn from a generator seeded by n so the answer is a pure
/// function of the inputs.
inline bool is_probable_prime(const BigInt& n, unsigned rounds = kDefaultPrimalityRounds) {
  if (rounds < 1) throw Error(Errc::InvalidArgument, "primality test needs at least one round");
  if (n < 2) return false;
  if (n < 65536) return detail::trial_division_prime(static_cast<std::uint64_t>(n));

  for (unsigned q : detail::small_primes()) {
    if (n % q == 0) return false;
  }

  BigInt d = n - 1;
  unsigned s = 0;
  while (!boost::multiprecision::bit_test(d, 0)) {
    d >>= 1;
    ++s;
  }
  std::mt19937_64 rng(static_cast<std::uint64_t>(n & 0xffffffffffffffffULL));
  for (unsigned i = 0; i < rounds; ++i) {
    BigInt a = random_in_range(BigInt(2), n - 2, rng);
    if (detail::miller_rabin_witness(n, a, d, s)) return false;
  }
  return true;
}

struct PrimePower {
  BigInt prime;
  unsigned exponent = 0;
};

/// Trial division over at most `budget` candidate divisors. A leftover
/// cofactor is accepted when it tests prime; otherwise the factorization is
/// reported as out of reach.
inline std::optional<std::vector<PrimePower>> factor_by_trial(BigInt n, std::uint64_t budget) {
  if (n < 1) throw Error(Errc::InvalidArgument, "can only factor positive integers");
  std::vector<PrimePower> factors;
  auto strip = [&](const BigInt& d) {
    unsigned e = 0;
    while (n % d == 0) {
      n /= d;
      ++e;
    }
    if (e > 0) factors.push_back({d, e});
  };

  std::uint64_t tried = 0;
  BigInt d = 2;
  while (n > 1 && d * d <= n) {
    if (tried++ >= budget) break;
    strip(d);
    d += (d == 2) ? 1 : 2;
  }
  if (n > 1) {
    if (d * d > n || is_probable_prime(n)) {
      factors.push_back({n, 1});
    } else {
      return std::nullopt;
    }
  }
  return factors;
}

/// Exact order of g in (Z/p)^*, or nullopt when p-1 does not factor within
/// the budget.
inline std::optional<BigInt> multiplicative_order(const Element& g, const BigInt& p,
                                                  std::uint64_t factor_budget = kDefaultFactorBudget) {
  if (g <= 0 || g >= p) throw Error(Errc::InvalidArgument, "order needs 0 < g < p");
  auto factors = factor_by_trial(p - 1, factor_budget);
  if (!factors) return std::nullopt;
  BigInt order = p - 1;
  for (const auto& [q, e] : *factors) {
    for (unsigned i = 0; i < e; ++i) {
      if (mod_pow(g, order / q, p) != 1) break;
      order /= q;
    }
  }
  return order;
}

// ---------------------------------------------------------------------------
// Group parameters

struct GroupParams {
  BigInt p;
  std::vector<Element> bases;
  std::uint64_t min_order = 1;

  friend bool operator==(const GroupParams&, const GroupParams&) = default;
};

enum class ViolationKind { NotPrime, BaseOutOfRange, DuplicateBases, OrderTooSmall, NoBases };

struct Violation {
  ViolationKind kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  /// Set when p-1 could not be factored, so base orders went unchecked.
  bool order_check_skipped = false;

  bool ok() const { return violations.empty(); }
};

inline std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::NotPrime: return "p not prime";
    case ViolationKind::BaseOutOfRange: return "base out of range";
    case ViolationKind::DuplicateBases: return "bases not distinct";
    case ViolationKind::OrderTooSmall: return "base order below min_order";
    case ViolationKind::NoBases: return "no bases";
  }
  return "unknown";
}

/// Collects every violated invariant rather than stopping at the first.
inline ValidationReport validate_params(const GroupParams& params,
                                        std::uint64_t factor_budget = kDefaultFactorBudget) {
  ValidationReport report;
  const bool prime = is_probable_prime(params.p);
  if (!prime) {
    report.violations.push_back({ViolationKind::NotPrime, to_decimal(params.p) + " is composite or < 2"});
  }
  if (params.bases.empty()) report.violations.push_back({ViolationKind::NoBases, "base list is empty"});

  bool all_in_range = true;
  for (std::size_t i = 0; i < params.bases.size(); ++i) {
    const auto& b = params.bases[i];
    if (b <= 1 || b >= params.p) {
      all_in_range = false;
      report.violations.push_back(
          {ViolationKind::BaseOutOfRange, "bases[" + std::to_string(i) + "] = " + to_decimal(b) + " not in (1, p)"});
    }
  }
  for (std::size_t i = 0; i < params.bases.size(); ++i) {
    for (std::size_t j = i + 1; j < params.bases.size(); ++j) {
      if (params.p > 0 && mod_reduce(params.bases[i], params.p) == mod_reduce(params.bases[j], params.p)) {
        report.violations.push_back({ViolationKind::DuplicateBases,
                                     "bases[" + std::to_string(i) + "] == bases[" + std::to_string(j) + "]"});
      }
    }
  }

  if (prime && all_in_range) {
    for (std::size_t i = 0; i < params.bases.size(); ++i) {
      auto order = multiplicative_order(params.bases[i], params.p, factor_budget);
      if (!order) {
        report.order_check_skipped = true;
        break;
      }
      if (*order < params.min_order) {
        report.violations.push_back({ViolationKind::OrderTooSmall, "bases[" + std::to_string(i) + "] has order " +
                                                                       to_decimal(*order) + " < " +
                                                                       std::to_string(params.min_order)});
      }
    }
  } else {
    report.order_check_skipped = true;
  }
  return report;
}

/// Safe prime p = 2q + 1 of the requested bit length, with `num_bases`
/// distinct quadratic residues (each of order q) as bases.
template <class Rng>
GroupParams generate_params(unsigned bits, std::size_t num_bases, Rng& rng, std::uint64_t attempt_budget = 1'000'000) {
  if (bits < 6 || bits > 512) throw Error(Errc::InvalidArgument, "bit size must be in [6, 512]");
  if (num_bases < 1) throw Error(Errc::InvalidArgument, "need at least one base");

  const BigInt q_lo = BigInt(1) << (bits - 2);
  const BigInt q_hi = (BigInt(1) << (bits - 1)) - 1;
  for (std::uint64_t attempt = 0; attempt < attempt_budget; ++attempt) {
    BigInt q = random_in_range(q_lo, q_hi, rng) | 1;
    BigInt p = 2 * q + 1;
    bool sieved = false;
    for (unsigned s : detail::small_primes()) {
      if ((q % s == 0 && q != s) || (p % s == 0 && p != s)) {
        sieved = true;
        break;
      }
    }
    if (sieved || !is_probable_prime(q) || !is_probable_prime(p)) continue;
    // q residues exist besides 1; ask for no more than that.
    if (BigInt(num_bases) > q - 1) throw Error(Errc::InvalidArgument, "too many bases for this bit size");

    GroupParams params{p, {}, 1};
    params.min_order = q > BigInt(std::uint64_t{1} << 63) ? (std::uint64_t{1} << 63) : static_cast<std::uint64_t>(q);
    while (params.bases.size() < num_bases) {
      BigInt h = random_in_range(BigInt(2), p - 2, rng);
      BigInt b = (h * h) % p;
      if (b <= 1 || std::find(params.bases.begin(), params.bases.end(), b) != params.bases.end()) continue;
      params.bases.push_back(b);
    }
    return params;
  }
  throw Error(Errc::BudgetExceeded, "no safe prime found within " + std::to_string(attempt_budget) + " attempts");
}

}  // namespace ringdh
