#pragma once

// Which parties end up holding equal keys, as a function of base picks.
// Party i's final key is determined by the pick of party i+1, so the whole
// analysis reduces to a left rotation of the choice vector.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ringdh/error.hpp"
#include "ringdh/modmath.hpp"

namespace ringdh {

using Rational = boost::multiprecision::cpp_rational;
using Choices = std::vector<std::size_t>;

inline constexpr std::uint64_t kDefaultEnumerationBudget = 1'000'000;

struct SharingPattern {
  Choices effective_bases;
  /// Key-equality classes, each sorted, ordered by smallest member.
  std::vector<std::vector<std::size_t>> classes;
  /// Position j-1 is '1' iff party j shares party 0's key (j = 1..N-1).
  std::string shares_with_first;

  friend bool operator==(const SharingPattern&, const SharingPattern&) = default;
};

inline Choices effective_bases(const Choices& choices) {
  if (choices.size() < 2) throw Error(Errc::InvalidArgument, "need at least two parties");
  Choices out(choices.size());
  for (std::size_t i = 0; i < choices.size(); ++i) out[i] = choices[(i + 1) % choices.size()];
  return out;
}

/// Groups indices whose labels compare equal; classes come out ordered by
/// their smallest member.
template <class T>
std::vector<std::vector<std::size_t>> partition_by_equality(const std::vector<T>& labels) {
  std::vector<std::vector<std::size_t>> classes;
  std::vector<bool> placed(labels.size(), false);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (placed[i]) continue;
    std::vector<std::size_t> cls;
    for (std::size_t j = i; j < labels.size(); ++j) {
      if (!placed[j] && labels[j] == labels[i]) {
        cls.push_back(j);
        placed[j] = true;
      }
    }
    classes.push_back(std::move(cls));
  }
  return classes;
}

inline SharingPattern sharing_pattern(const Choices& choices) {
  SharingPattern out;
  out.effective_bases = effective_bases(choices);
  out.classes = partition_by_equality(out.effective_bases);
  for (std::size_t j = 1; j < choices.size(); ++j) {
    out.shares_with_first.push_back(out.effective_bases[j] == out.effective_bases[0] ? '1' : '0');
  }
  return out;
}

/// Groupings of four-party, two-base assignments: everyone equal, one odd
/// pick, adjacent pairs, or alternating pairs.
enum class CaseClass { AllSame, ThreeOne, AdjacentPairs, OppositePairs, Other };

inline std::string_view to_string(CaseClass c) {
  switch (c) {
    case CaseClass::AllSame: return "all-same";
    case CaseClass::ThreeOne: return "three-one";
    case CaseClass::AdjacentPairs: return "adjacent-pairs";
    case CaseClass::OppositePairs: return "opposite-pairs";
    case CaseClass::Other: return "other";
  }
  return "other";
}

inline CaseClass classify_case(const Choices& choices) {
  if (choices.size() != 4) return CaseClass::Other;
  auto classes = partition_by_equality(choices);
  if (classes.size() == 1) return CaseClass::AllSame;
  if (classes.size() != 2) return CaseClass::Other;
  if (classes[0].size() != 2) return CaseClass::ThreeOne;
  // Two pairs: alternating iff positions 0 and 2 agree.
  return choices[0] == choices[2] ? CaseClass::OppositePairs : CaseClass::AdjacentPairs;
}

/// The four listed assignments for three parties (u,u,u / u,u,w / u,w,u /
/// w,u,u) and for four parties (u,u,u,w / u,u,w,u / u,w,u,u / w,u,u,u),
/// with u as base 0 and w as base 1.
inline std::vector<Choices> published_case_rows(std::size_t num_parties) {
  if (num_parties == 3) return {{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {1, 0, 0}};
  if (num_parties == 4) return {{0, 0, 0, 1}, {0, 0, 1, 0}, {0, 1, 0, 0}, {1, 0, 0, 0}};
  throw Error(Errc::InvalidArgument, "published case lists exist only for 3 and 4 parties");
}

struct EnumerationRow {
  Choices choices;
  SharingPattern pattern;
};

struct ClassStats {
  std::uint64_t count = 0;
  Rational first_shares_with_any;
  Rational expected_fraction_sharing;
};

struct Enumeration {
  std::size_t num_parties = 0;
  std::size_t num_bases = 0;
  std::vector<EnumerationRow> rows;
  /// Fraction of rows where party 0 shares its key with at least one other.
  Rational first_shares_with_any;
  /// Mean over rows of (#others sharing with party 0) / (N-1).
  Rational expected_fraction_sharing;
  /// Populated for four parties over two bases.
  std::map<CaseClass, ClassStats> by_case;
};

using Predicate = std::function<bool(const SharingPattern&)>;

inline bool first_shares_with_any(const SharingPattern& s) {
  return s.shares_with_first.find('1') != std::string::npos;
}

inline bool all_share(const SharingPattern& s) { return s.classes.size() == 1; }

inline Rational probability_over(const std::vector<EnumerationRow>& rows, const Predicate& predicate) {
  if (rows.empty()) throw Error(Errc::InvalidArgument, "probability over an empty case set");
  std::uint64_t hits = 0;
  for (const auto& r : rows) hits += predicate(r.pattern) ? 1 : 0;
  return Rational(hits, rows.size());
}

inline Rational expected_sharing_fraction(const std::vector<EnumerationRow>& rows) {
  if (rows.empty()) throw Error(Errc::InvalidArgument, "expectation over an empty case set");
  std::uint64_t ones = 0, slots = 0;
  for (const auto& r : rows) {
    for (char c : r.pattern.shares_with_first) ones += c == '1' ? 1 : 0;
    slots += r.pattern.shares_with_first.size();
  }
  return Rational(ones, slots);
}

inline std::vector<EnumerationRow> rows_for(const std::vector<Choices>& assignments) {
  std::vector<EnumerationRow> rows;
  rows.reserve(assignments.size());
  for (const auto& c : assignments) rows.push_back({c, sharing_pattern(c)});
  return rows;
}

/// Every assignment of `num_bases` bases to `num_parties` parties, in
/// lexicographic order of the choice vector.
inline std::vector<Choices> all_assignments(std::size_t num_parties, std::size_t num_bases,
                                            std::uint64_t budget = kDefaultEnumerationBudget) {
  if (num_parties < 2) throw Error(Errc::InvalidArgument, "need at least two parties");
  if (num_bases < 1) throw Error(Errc::InvalidArgument, "need at least one base");
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < num_parties; ++i) {
    if (total > budget / num_bases) {
      throw Error(Errc::BudgetExceeded, std::to_string(num_bases) + "^" + std::to_string(num_parties) +
                                            " assignments exceed budget " + std::to_string(budget));
    }
    total *= num_bases;
  }
  std::vector<Choices> out;
  out.reserve(total);
  Choices cur(num_parties, 0);
  for (std::uint64_t n = 0; n < total; ++n) {
    out.push_back(cur);
    for (std::size_t pos = num_parties; pos-- > 0;) {
      if (++cur[pos] < num_bases) break;
      cur[pos] = 0;
    }
  }
  return out;
}

inline Enumeration summarize(std::size_t num_parties, std::size_t num_bases, std::vector<EnumerationRow> rows) {
  Enumeration e;
  e.num_parties = num_parties;
  e.num_bases = num_bases;
  e.rows = std::move(rows);
  e.first_shares_with_any = probability_over(e.rows, first_shares_with_any);
  e.expected_fraction_sharing = expected_sharing_fraction(e.rows);
  if (num_parties == 4 && num_bases == 2) {
    std::map<CaseClass, std::vector<EnumerationRow>> groups;
    for (const auto& r : e.rows) groups[classify_case(r.choices)].push_back(r);
    for (const auto& [cls, members] : groups) {
      e.by_case[cls] = {members.size(), probability_over(members, first_shares_with_any),
                        expected_sharing_fraction(members)};
    }
  }
  return e;
}

inline Enumeration enumerate_assignments(std::size_t num_parties, std::size_t num_bases,
                                         std::uint64_t budget = kDefaultEnumerationBudget) {
  return summarize(num_parties, num_bases, rows_for(all_assignments(num_parties, num_bases, budget)));
}

/// Exact probability that `predicate` holds under uniform base picks,
/// optionally restricted to assignments accepted by `filter`.
inline Rational agreement_probability(std::size_t num_parties, std::size_t num_bases, const Predicate& predicate,
                                      const std::function<bool(const Choices&)>& filter = {},
                                      std::uint64_t budget = kDefaultEnumerationBudget) {
  std::vector<Choices> kept;
  for (auto& c : all_assignments(num_parties, num_bases, budget)) {
    if (!filter || filter(c)) kept.push_back(std::move(c));
  }
  return probability_over(rows_for(kept), predicate);
}

// ---------------------------------------------------------------------------
// Presentation

inline std::string party_name(std::size_t i) {
  if (i < 26) return std::string(1, static_cast<char>('A' + i));
  return "P" + std::to_string(i);
}

inline std::string base_letter(std::size_t index) {
  static constexpr const char* kLetters[] = {"u", "v", "w", "x", "y", "z"};
  if (index < 6) return kLetters[index];
  return "b" + std::to_string(index);
}

inline std::optional<std::size_t> parse_base_letter(std::string_view text) {
  for (std::size_t i = 0; i < 6; ++i) {
    if (text == base_letter(i)) return i;
  }
  if (text.size() > 1 && text[0] == 'b') {
    std::size_t v = 0;
    for (char c : text.substr(1)) {
      if (c < '0' || c > '9') return std::nullopt;
      v = v * 10 + static_cast<std::size_t>(c - '0');
    }
    return v;
  }
  return std::nullopt;
}

inline std::string join_names(const std::vector<std::size_t>& parties, bool serial_comma) {
  std::string out;
  for (std::size_t i = 0; i < parties.size(); ++i) {
    if (i > 0) {
      const bool last = i + 1 == parties.size();
      if (last && parties.size() > 2) {
        out += serial_comma ? ", and " : " and ";
      } else {
        out += ", ";
      }
    }
    out += party_name(parties[i]);
  }
  return out;
}

/// Sentence in the style of the published result columns, e.g.
/// "A, C share key" or "B, C don't share key with A".
inline std::string describe_sharing(const SharingPattern& s, bool serial_comma) {
  const auto& first = s.classes.front();
  if (first.size() == 1) {
    std::vector<std::size_t> others;
    for (std::size_t i = 1; i < s.effective_bases.size(); ++i) others.push_back(i);
    return join_names(others, serial_comma) + " don't share key with A";
  }
  return join_names(first, serial_comma) + " share key";
}

inline std::string classes_text(const SharingPattern& s) {
  std::string out;
  for (std::size_t c = 0; c < s.classes.size(); ++c) {
    if (c > 0) out += ';';
    for (std::size_t i = 0; i < s.classes[c].size(); ++i) {
      if (i > 0) out += ' ';
      out += party_name(s.classes[c][i]);
    }
  }
  return out;
}

/// Columns: choices, effective_bases, classes, bitstring. `labels` names
/// base indices; defaults to u, v, w, ...
inline std::string to_csv(const std::vector<EnumerationRow>& rows, const std::vector<std::string>& labels = {}) {
  auto label = [&](std::size_t b) { return b < labels.size() ? labels[b] : base_letter(b); };
  auto letters = [&](const Choices& c) {
    std::string s;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i > 0) s += ' ';
      s += label(c[i]);
    }
    return s;
  };
  std::ostringstream out;
  out << "choices,effective_bases,classes,bitstring\n";
  for (const auto& r : rows) {
    out << letters(r.choices) << ',' << letters(r.pattern.effective_bases) << ',' << classes_text(r.pattern) << ','
        << r.pattern.shares_with_first << '\n';
  }
  return out.str();
}

inline std::string to_string(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

}  // namespace ringdh
