#pragma once

// Power-sum verification. For public bases b_1..b_k, G(n) = sum_i b_i^n
// satisfies G(n) = c_1 G(n-1) + ... + c_k G(n-k) mod p with
// c_j = (-1)^(j+1) e_j(b), e_j the elementary symmetric polynomials. Any
// k+1 consecutive values can therefore be checked without knowing n.
//
// For three bases this is (alpha, beta, gamma) = (u+v+w, -(uv+vw+wu), uvw).
// Larger k is an extension of the same characteristic-polynomial argument.

#include <cstddef>
#include <string>
#include <vector>

#include "ringdh/error.hpp"
#include "ringdh/modmath.hpp"

namespace ringdh {

struct RecurrenceCoefficients {
  std::vector<Element> values;

  std::size_t k() const { return values.size(); }
  friend bool operator==(const RecurrenceCoefficients&, const RecurrenceCoefficients&) = default;
};

struct PowerSumSeries {
  BigInt p;
  std::vector<Element> bases;
  std::vector<Element> values;
};

inline void require_distinct(const std::vector<Element>& bases, const BigInt& p, Errc code) {
  for (std::size_t i = 0; i < bases.size(); ++i) {
    for (std::size_t j = i + 1; j < bases.size(); ++j) {
      if (mod_reduce(bases[i], p) == mod_reduce(bases[j], p)) {
        throw Error(code, "bases " + std::to_string(i) + " and " + std::to_string(j) + " coincide mod p");
      }
    }
  }
}

inline RecurrenceCoefficients coefficients_sym(const std::vector<Element>& bases, const BigInt& p) {
  if (bases.empty()) throw Error(Errc::InvalidArgument, "need at least one base");
  if (p < 2) throw Error(Errc::InvalidArgument, "modulus must be at least 2");
  require_distinct(bases, p, Errc::DuplicateBases);

  // e[j] after processing the first m bases = e_j(b_1..b_m).
  std::vector<BigInt> e(bases.size() + 1, 0);
  e[0] = 1;
  for (std::size_t m = 0; m < bases.size(); ++m) {
    const BigInt b = mod_reduce(bases[m], p);
    for (std::size_t j = m + 1; j >= 1; --j) e[j] = (e[j] + e[j - 1] * b) % p;
  }
  RecurrenceCoefficients out;
  for (std::size_t j = 1; j <= bases.size(); ++j) {
    out.values.push_back(j % 2 == 1 ? e[j] : mod_reduce(-e[j], p));
  }
  return out;
}

/// (v-w)(w-u)(u-v) mod p: the determinant of the ascending Vandermonde
/// matrix [1 x x^2]. The descending form [x^2 x 1] has the opposite sign.
inline Element vandermonde_factor(const Element& u, const Element& v, const Element& w, const BigInt& p) {
  return mod_reduce((v - w) * (w - u) * (u - v), p);
}

/// Solves [u^2 u 1; v^2 v 1; w^2 w 1] (a, b, c)^T = (u^3, v^3, w^3)^T with
/// the cofactor matrix: x = C^T y / det.
inline RecurrenceCoefficients coefficients_matrix(const Element& u, const Element& v, const Element& w,
                                                  const BigInt& p) {
  if (p < 2) throw Error(Errc::InvalidArgument, "modulus must be at least 2");
  const BigInt cof[3][3] = {
      {v - w, w * w - v * v, v * v * w - v * w * w},
      {w - u, u * u - w * w, u * w * w - w * u * u},
      {u - v, v * v - u * u, u * u * v - u * v * v},
  };
  // Expansion along the first column of the cofactor matrix's transpose
  // equals expansion of the system matrix along its first row.
  const BigInt det = mod_reduce(u * u * cof[0][0] + u * cof[0][1] + cof[0][2], p);
  if (det == 0) throw Error(Errc::SingularSystem, "two bases coincide mod p");
  const BigInt inv = mod_inv(det, p);
  const BigInt rhs[3] = {u * u * u, v * v * v, w * w * w};

  RecurrenceCoefficients out;
  for (int i = 0; i < 3; ++i) {
    BigInt acc = 0;
    for (int j = 0; j < 3; ++j) acc += cof[j][i] * rhs[j];
    out.values.push_back(mod_reduce(mod_reduce(acc, p) * inv, p));
  }
  return out;
}

inline RecurrenceCoefficients coefficients_matrix(const std::vector<Element>& bases, const BigInt& p) {
  if (bases.size() != 3) throw Error(Errc::InvalidArgument, "matrix path takes exactly three bases");
  return coefficients_matrix(bases[0], bases[1], bases[2], p);
}

/// Gauss-Jordan elimination over GF(p).
inline std::vector<Element> solve_linear_mod(std::vector<std::vector<BigInt>> a, std::vector<BigInt> b,
                                             const BigInt& p) {
  const std::size_t n = a.size();
  if (b.size() != n) throw Error(Errc::InvalidArgument, "system dimensions disagree");
  for (auto& row : a) {
    if (row.size() != n) throw Error(Errc::InvalidArgument, "matrix must be square");
    for (auto& x : row) x = mod_reduce(x, p);
  }
  for (auto& x : b) x = mod_reduce(x, p);

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) throw Error(Errc::SingularSystem, "matrix is singular mod p");
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    const BigInt inv = mod_inv(a[col][col], p);
    for (auto& x : a[col]) x = (x * inv) % p;
    b[col] = (b[col] * inv) % p;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const BigInt f = a[r][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] = mod_reduce(a[r][c] - f * a[col][c], p);
      b[r] = mod_reduce(b[r] - f * b[col], p);
    }
  }
  return b;
}

/// Any k: solve b_i^k = sum_j c_j b_i^(k-j) for the c_j directly.
inline RecurrenceCoefficients coefficients_vandermonde(const std::vector<Element>& bases, const BigInt& p) {
  const std::size_t k = bases.size();
  if (k == 0) throw Error(Errc::InvalidArgument, "need at least one base");
  std::vector<std::vector<BigInt>> a(k, std::vector<BigInt>(k));
  std::vector<BigInt> rhs(k);
  for (std::size_t i = 0; i < k; ++i) {
    const BigInt b = mod_reduce(bases[i], p);
    for (std::size_t j = 0; j < k; ++j) a[i][j] = mod_pow(b, k - 1 - j, p);
    rhs[i] = mod_pow(b, k, p);
  }
  return {solve_linear_mod(std::move(a), std::move(rhs), p)};
}

inline Element power_sum(const std::vector<Element>& bases, const BigInt& n, const BigInt& p) {
  if (n < 0) throw Error(Errc::InvalidArgument, "negative index");
  BigInt acc = 0;
  for (const auto& b : bases) acc += mod_pow(mod_reduce(b, p), n, p);
  return acc % p;
}

/// G(0..n_max) by direct exponentiation, never by the recurrence.
inline PowerSumSeries series(const std::vector<Element>& bases, const BigInt& p, std::size_t n_max) {
  PowerSumSeries s{p, bases, {}};
  s.values.reserve(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) s.values.push_back(power_sum(bases, n, p));
  return s;
}

struct RecurrenceCheck {
  bool pass = true;
  /// Smallest violating index; meaningful only when !pass.
  std::size_t first_bad = 0;
};

/// Checks values[n] = sum_j c_j values[n-j] for every n >= k.
inline RecurrenceCheck check_recurrence(const std::vector<Element>& values, const RecurrenceCoefficients& coeffs,
                                        const BigInt& p) {
  const std::size_t k = coeffs.k();
  if (k == 0) throw Error(Errc::InvalidArgument, "empty coefficient list");
  if (values.size() < k + 1) {
    throw Error(Errc::WindowTooShort, "need " + std::to_string(k + 1) + " values, have " + std::to_string(values.size()));
  }
  for (std::size_t n = k; n < values.size(); ++n) {
    BigInt acc = 0;
    for (std::size_t j = 1; j <= k; ++j) acc += coeffs.values[j - 1] * values[n - j];
    if (mod_reduce(acc, p) != mod_reduce(values[n], p)) return {false, n};
  }
  return {};
}

inline RecurrenceCheck check_recurrence(const PowerSumSeries& s, const RecurrenceCoefficients& coeffs) {
  return check_recurrence(s.values, coeffs, s.p);
}

/// A run of consecutive power sums at an undisclosed exponent offset. The
/// tag names the offset; the offset itself is never part of a claim.
struct VerificationClaim {
  BigInt p;
  std::vector<Element> bases;
  std::vector<Element> window;
  std::string start_tag;

  friend bool operator==(const VerificationClaim&, const VerificationClaim&) = default;
};

inline VerificationClaim make_claim(BigInt p, std::vector<Element> bases, std::vector<Element> window,
                                    std::string start_tag) {
  if (bases.empty()) throw Error(Errc::InvalidArgument, "claim needs at least one base");
  require_distinct(bases, p, Errc::DuplicateBases);
  return {std::move(p), std::move(bases), std::move(window), std::move(start_tag)};
}

enum class RejectReason { None, WindowTooShort, RecurrenceViolated, DuplicateBases, ValueOutOfRange, BadModulus };

inline std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::None: return "none";
    case RejectReason::WindowTooShort: return "WindowTooShort";
    case RejectReason::RecurrenceViolated: return "RecurrenceViolated";
    case RejectReason::DuplicateBases: return "DuplicateBases";
    case RejectReason::ValueOutOfRange: return "ValueOutOfRange";
    case RejectReason::BadModulus: return "BadModulus";
  }
  return "unknown";
}

struct Verdict {
  RejectReason reason = RejectReason::None;
  /// Window offset of the first violation, for RecurrenceViolated and
  /// ValueOutOfRange.
  std::size_t offset = 0;

  bool accepted() const { return reason == RejectReason::None; }
};

inline Verdict verify_claim(const VerificationClaim& claim) {
  if (claim.p < 2) return {RejectReason::BadModulus, 0};
  const std::size_t k = claim.bases.size();
  if (k == 0) return {RejectReason::DuplicateBases, 0};
  for (std::size_t i = 0; i < claim.window.size(); ++i) {
    if (claim.window[i] < 0 || claim.window[i] >= claim.p) return {RejectReason::ValueOutOfRange, i};
  }
  if (claim.window.size() < k + 1) return {RejectReason::WindowTooShort, 0};
  RecurrenceCoefficients coeffs;
  try {
    coeffs = coefficients_sym(claim.bases, claim.p);
  } catch (const Error&) {
    return {RejectReason::DuplicateBases, 0};
  }
  auto check = check_recurrence(claim.window, coeffs, claim.p);
  if (!check.pass) return {RejectReason::RecurrenceViolated, check.first_bad};
  return {};
}

}  // namespace ringdh
