#include <random>

#include <gtest/gtest.h>

#include "ringdh/outcome.hpp"
#include "ringdh/protocol.hpp"

using namespace ringdh;

namespace {
constexpr std::size_t u = 0, w = 1;
}

TEST(EffectiveBases, RotatesLeft) {
  EXPECT_EQ(effective_bases({u, u, w}), (Choices{u, w, u}));
  EXPECT_EQ(effective_bases({u, u, u}), (Choices{u, u, u}));
  EXPECT_EQ(effective_bases({u, u, u, w}), (Choices{u, u, w, u}));
  EXPECT_THROW(effective_bases({u}), Error);
}

TEST(SharingPattern, ThreePartyRows) {
  auto uuw = sharing_pattern({u, u, w});
  EXPECT_EQ(uuw.classes, (std::vector<std::vector<std::size_t>>{{0, 2}, {1}}));
  EXPECT_EQ(uuw.shares_with_first, "01");
  EXPECT_EQ(describe_sharing(uuw, false), "A, C share key");

  auto uwu = sharing_pattern({u, w, u});
  EXPECT_EQ(uwu.shares_with_first, "00");
  EXPECT_EQ(describe_sharing(uwu, false), "B, C don't share key with A");

  auto wuu = sharing_pattern({w, u, u});
  EXPECT_EQ(wuu.shares_with_first, "10");
  EXPECT_EQ(describe_sharing(wuu, false), "A, B share key");

  auto uuu = sharing_pattern({u, u, u});
  EXPECT_EQ(uuu.shares_with_first, "11");
  EXPECT_EQ(describe_sharing(uuu, false), "A, B and C share key");
}

TEST(SharingPattern, FourPartyRows) {
  EXPECT_EQ(sharing_pattern({u, u, u, w}).shares_with_first, "101");
  EXPECT_EQ(describe_sharing(sharing_pattern({u, u, u, w}), true), "A, B, and D share key");
  // Rotation puts C's w in front of B: A, C and D share.
  EXPECT_EQ(sharing_pattern({u, u, w, u}).shares_with_first, "011");
  EXPECT_EQ(describe_sharing(sharing_pattern({u, u, w, u}), true), "A, C, and D share key");
  EXPECT_EQ(sharing_pattern({u, w, u, u}).shares_with_first, "000");
  EXPECT_EQ(describe_sharing(sharing_pattern({u, w, u, u}), true), "B, C, and D don't share key with A");
  EXPECT_EQ(sharing_pattern({w, u, u, u}).shares_with_first, "110");
  EXPECT_EQ(describe_sharing(sharing_pattern({w, u, u, u}), true), "A, B, and C share key");

  EXPECT_EQ(sharing_pattern({u, u, w, w}).shares_with_first, "001");
  EXPECT_EQ(sharing_pattern({u, w, u, w}).shares_with_first, "010");
  EXPECT_EQ(classes_text(sharing_pattern({u, w, u, w})), "A C;B D");
}

TEST(CaseClass, FourPartyGroupings) {
  EXPECT_EQ(classify_case({u, u, u, u}), CaseClass::AllSame);
  EXPECT_EQ(classify_case({u, u, u, w}), CaseClass::ThreeOne);
  EXPECT_EQ(classify_case({w, u, u, u}), CaseClass::ThreeOne);
  EXPECT_EQ(classify_case({u, u, w, w}), CaseClass::AdjacentPairs);
  EXPECT_EQ(classify_case({w, u, u, w}), CaseClass::AdjacentPairs);
  EXPECT_EQ(classify_case({u, w, u, w}), CaseClass::OppositePairs);
  EXPECT_EQ(classify_case({u, w, 2, u}), CaseClass::Other);
}

TEST(Enumerate, RowCountsAndSingleBase) {
  auto one = enumerate_assignments(3, 1);
  ASSERT_EQ(one.rows.size(), 1u);
  EXPECT_TRUE(all_share(one.rows[0].pattern));
  for (std::size_t n = 2; n <= 5; ++n) {
    for (std::size_t b = 1; b <= 3; ++b) {
      std::size_t expected = 1;
      for (std::size_t i = 0; i < n; ++i) expected *= b;
      EXPECT_EQ(enumerate_assignments(n, b).rows.size(), expected);
    }
  }
  EXPECT_THROW(enumerate_assignments(10, 10, 1000), Error);
  try {
    enumerate_assignments(10, 10, 1000);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BudgetExceeded);
  }
}

TEST(Enumerate, PublishedRows) {
  auto three = summarize(3, 2, rows_for(published_case_rows(3)));
  std::vector<std::string> bits;
  for (const auto& r : three.rows) bits.push_back(r.pattern.shares_with_first);
  EXPECT_EQ(bits, (std::vector<std::string>{"11", "01", "00", "10"}));
  EXPECT_EQ(three.first_shares_with_any, Rational(3, 4));
}

TEST(Enumerate, FullFourPartyStatistics) {
  // Hand count over all 16 assignments: party 0 is isolated exactly when
  // choices[1] differs from every other effective base, i.e. when
  // choices[2], choices[3], choices[0] all equal the complement of
  // choices[1]: 2 assignments. So 14/16 share with someone.
  auto e = enumerate_assignments(4, 2);
  EXPECT_EQ(e.first_shares_with_any, Rational(14, 16));
  // Each other party matches party 0's effective base with probability 1/2.
  EXPECT_EQ(e.expected_fraction_sharing, Rational(1, 2));
  EXPECT_EQ(e.by_case.at(CaseClass::AllSame).count, 2u);
  EXPECT_EQ(e.by_case.at(CaseClass::ThreeOne).count, 8u);
  EXPECT_EQ(e.by_case.at(CaseClass::AdjacentPairs).count, 4u);
  EXPECT_EQ(e.by_case.at(CaseClass::OppositePairs).count, 2u);
  EXPECT_EQ(e.by_case.at(CaseClass::OppositePairs).expected_fraction_sharing, Rational(1, 3));
}

TEST(AgreementProbability, Examples) {
  EXPECT_EQ(agreement_probability(3, 1, first_shares_with_any), Rational(1));
  EXPECT_EQ(probability_over(rows_for(published_case_rows(3)), first_shares_with_any), Rational(3, 4));
  // Four-party listing: sharing counts 2, 2, 0, 2 over 12 slots.
  EXPECT_EQ(expected_sharing_fraction(rows_for(published_case_rows(4))), Rational(1, 2));
  EXPECT_EQ(probability_over(rows_for(published_case_rows(4)), first_shares_with_any), Rational(3, 4));

  auto three_one = [](const Choices& c) { return classify_case(c) == CaseClass::ThreeOne; };
  EXPECT_EQ(agreement_probability(4, 2, first_shares_with_any, three_one), Rational(3, 4));
}

TEST(AgreementProbability, DenominatorsDivideAssignmentCount) {
  for (std::size_t n = 2; n <= 5; ++n) {
    for (std::size_t b = 1; b <= 3; ++b) {
      BigInt total = 1;
      for (std::size_t i = 0; i < n; ++i) total *= b;
      for (const auto& pred : {Predicate(first_shares_with_any), Predicate(all_share)}) {
        const Rational r = agreement_probability(n, b, pred);
        EXPECT_EQ(total % boost::multiprecision::denominator(r), 0);
      }
    }
  }
}

TEST(Rotation, SharingIffNextPicksEqual) {
  for (std::size_t n = 2; n <= 5; ++n) {
    for (const auto& c : all_assignments(n, 3)) {
      const auto s = sharing_pattern(c);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          bool same_class = false;
          for (const auto& cls : s.classes) {
            same_class = same_class || (std::count(cls.begin(), cls.end(), i) && std::count(cls.begin(), cls.end(), j));
          }
          EXPECT_EQ(same_class, c[(i + 1) % n] == c[(j + 1) % n]);
        }
      }
    }
  }
}

// Central cross-check: the closed-form partition equals the partition of
// actual final keys from running the ceremony.
TEST(OracleEquivalence, PatternMatchesCeremony) {
  std::mt19937_64 rng(8);
  const std::vector<std::uint64_t> primes{1009, 2003, 4001, 7919, 65521};
  for (std::size_t n = 2; n <= 5; ++n) {
    for (std::size_t b = 1; b <= 3; ++b) {
      for (const auto& c : all_assignments(n, b)) {
        const std::uint64_t p = primes[rng() % primes.size()];
        // Distinct bases with full order mod these primes avoid accidental
        // key collisions between distinct bases.
        GroupParams params{p, {}, 1};
        while (params.bases.size() < b) {
          BigInt g = random_in_range(BigInt(2), BigInt(p - 2), rng);
          if (*multiplicative_order(g, p) == p - 1 &&
              std::find(params.bases.begin(), params.bases.end(), g) == params.bases.end()) {
            params.bases.push_back(g);
          }
        }
        std::vector<BigInt> secrets;
        for (std::size_t i = 0; i < n; ++i) secrets.push_back(random_secret(params, rng));
        // A product of secrets divisible by p-1 would collapse every key to 1.
        BigInt prod = 1;
        for (const auto& s : secrets) prod *= s;
        if (prod % (p - 1) == 0) continue;
        const auto t = run_ceremony(params, secrets, c);
        // Generators g1 != g2 give g1^x == g2^x only when x kills the ratio's
        // order; skip those rare degenerate draws.
        const auto observed = partition_by_equality(t.final_keys);
        const auto predicted = sharing_pattern(c).classes;
        if (observed != predicted) {
          bool degenerate = false;
          for (std::size_t i = 0; i < b; ++i) {
            for (std::size_t j = i + 1; j < b; ++j) {
              degenerate = degenerate || mod_pow(params.bases[i], prod, p) == mod_pow(params.bases[j], prod, p);
            }
          }
          EXPECT_TRUE(degenerate) << "pattern mismatch";
          continue;
        }
        EXPECT_EQ(observed, predicted);
      }
    }
  }
}

TEST(Csv, Columns) {
  auto csv = to_csv(rows_for({{u, u, w}}), {"u", "w"});
  EXPECT_EQ(csv, "choices,effective_bases,classes,bitstring\nu u w,u w u,A C;B,01\n");
}

TEST(BaseLetters, RoundTrip) {
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(parse_base_letter(base_letter(i)), i);
  EXPECT_FALSE(parse_base_letter("q"));
}
