#include <gtest/gtest.h>

#include <algorithm>

#include "stacksort/oracle/decomposition.hpp"
#include "stacksort/oracle/permutation.hpp"

using namespace stacksort;
using namespace stacksort::oracle;

namespace {

std::uint64_t factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

// |W_2(n)| = 2 (3n)! / ((n+1)! (2n+1)!).
std::uint64_t two_sortable_closed_form(int n) {
  BigInt num = 2;
  for (int i = 1; i <= 3 * n; ++i) num *= i;
  BigInt den = 1;
  for (int i = 1; i <= n + 1; ++i) den *= i;
  for (int i = 1; i <= 2 * n + 1; ++i) den *= i;
  return static_cast<std::uint64_t>(num / den);
}

}  // namespace

TEST(StackSort, FastAgreesWithRecursive) {
  for (int n = 0; n <= 8; ++n)
    for_each_permutation(n, [](const Perm& p) { ASSERT_EQ(stack_sort_fast(p), stack_sort(p)) << to_string(p); });
}

TEST(StackSort, KnownImage) {
  EXPECT_EQ(to_string(stack_sort(parse("326451"))), "234156");
  EXPECT_EQ(stack_sort(identity(5)), identity(5));
  EXPECT_EQ(stack_sort(Perm{}), Perm{});
}

TEST(StackSort, ImageEndsWithMaximum) {
  for_each_permutation(7, [](const Perm& p) { ASSERT_EQ(stack_sort(p).back(), 7); });
}

TEST(StackSort, OnePassCountsAreCatalan) {
  for (int n = 1; n <= 9; ++n) EXPECT_EQ(count_sortable(n, 1), catalan(n));
}

TEST(StackSort, TwoPassCountsMatchClosedForm) {
  for (int n = 1; n <= 9; ++n) EXPECT_EQ(count_sortable(n, 2), two_sortable_closed_form(n)) << n;
}

TEST(StackSort, IteratedSortReachesIdentity) {
  for (int n = 1; n <= 7; ++n) EXPECT_EQ(count_sortable(n, std::max(1, n - 1)), factorial(n));
}

TEST(StackSort, ThreePassCountsAgreeWithSlowPath) {
  for (int n = 1; n <= 7; ++n) {
    std::uint64_t slow = 0;
    for_each_permutation(n, [&](const Perm& p) { slow += is_k_stack_sortable(p, 3); });
    EXPECT_EQ(count_sortable(n, 3), slow);
  }
}

TEST(StackSort, EnumerationCapEnforced) {
  EXPECT_THROW(count_sortable(11, 3), ResourceError);
  EXPECT_THROW(count_sortable(6, 3, 5), ResourceError);
  EXPECT_THROW(preimage_count_brute(identity(10)), ResourceError);
}

TEST(Permutation, ParseAndStandardize) {
  EXPECT_EQ(parse("4213"), (Perm{4, 2, 1, 3}));
  EXPECT_EQ(standardize(Perm{7, 2, 9}), (Perm{2, 1, 3}));
  EXPECT_TRUE(is_identity(standardize(Perm{3, 8, 10})));
}

TEST(Preimages, TableSumsToFactorial) {
  for (int n = 1; n <= 8; ++n) {
    auto t = preimage_table(n);
    std::uint64_t s = 0;
    for (auto c : t) s += c;
    EXPECT_EQ(s, factorial(n));
    EXPECT_EQ(t.front(), catalan(n));
  }
}

TEST(Preimages, TableMatchesDirectSearch) {
  const int n = 6;
  auto t = preimage_table(n);
  std::size_t rank = 0;
  for_each_permutation(n, [&](const Perm& p) { ASSERT_EQ(t[rank++], preimage_count_brute(p)) << to_string(p); });
}

TEST(WestCheck, AgreesWithTwoPasses) {
  for (int n = 1; n <= 8; ++n)
    for_each_permutation(n, [](const Perm& p) { ASSERT_EQ(west_check(p), is_k_stack_sortable(p, 2)) << to_string(p); });
}

TEST(Statistics, WorkedExamples) {
  PermStats s = stats(parse("145326"));
  EXPECT_EQ(s.leg, 5);
  EXPECT_EQ(s.tl, 1);
  PermStats t = stats(parse("426315789"));
  EXPECT_EQ(t.tl, 3);
  EXPECT_EQ(t.tail_bound_descents, (std::vector<int>{3}));
  EXPECT_EQ(t.c_index, 3);
  HookSplit h = split_at_hook(parse("426315789"), 3, 8);
  EXPECT_EQ(to_string(h.unsheltered), "4269");
  EXPECT_EQ(to_string(h.sheltered), "3157");
  EXPECT_EQ(stats(identity(4)).c_index, 0);
}

TEST(Statistics, LegalSpacesOfIncreasing) {
  for (int n = 0; n <= 6; ++n) EXPECT_EQ(legal_spaces(identity(n)), n + 1);
}

TEST(Statistics, TailLength) {
  EXPECT_EQ(tail_length(parse("21345")), 3);
  EXPECT_EQ(tail_length(parse("12354")), 0);
  EXPECT_EQ(tail_length(identity(4)), 4);
}

TEST(Statistics, CIndexIsTailBoundDescent) {
  for (int n = 2; n <= 7; ++n)
    for_each_permutation(n, [](const Perm& p) {
      if (is_identity(p)) return;
      PermStats s = stats(p);
      ASSERT_FALSE(s.tail_bound_descents.empty()) << to_string(p);
      ASSERT_NE(std::find(s.tail_bound_descents.begin(), s.tail_bound_descents.end(), s.c_index),
                s.tail_bound_descents.end())
          << to_string(p);
    });
}

TEST(Decomposition, HookValidation) {
  EXPECT_THROW(split_at_hook(parse("321"), 1, 2), std::invalid_argument);
  EXPECT_THROW(split_at_hook(parse("123"), 2, 2), std::invalid_argument);
  EXPECT_THROW(preimage_count_decomposition(identity(4)), std::invalid_argument);
  EXPECT_THROW(preimage_count_decomposition(parse("2134"), 2), std::invalid_argument);
}

TEST(Decomposition, MatchesBruteForceOnAllOfS6) {
  const int n = 6;
  auto t = preimage_table(n);
  std::size_t rank = 0;
  DecompositionCounter dc;
  for_each_permutation(n, [&](const Perm& p) {
    const std::uint64_t brute = t[rank++];
    if (is_identity(p)) {
      ASSERT_EQ(dc.count(p), catalan(n));
      return;
    }
    ASSERT_EQ(dc.count(p), brute) << to_string(p);
    for (int d : tail_bound_descents(p)) ASSERT_EQ(preimage_count_decomposition(p, d), brute) << to_string(p) << " d=" << d;
  });
}

TEST(Decomposition, MatchesBruteForceOnS7) {
  const int n = 7;
  auto t = preimage_table(n);
  std::size_t rank = 0;
  DecompositionCounter dc;
  for_each_permutation(n, [&](const Perm& p) { ASSERT_EQ(dc.count(p), t[rank++]) << to_string(p); });
}

TEST(Indecomposable, Detection) {
  EXPECT_TRUE(is_sum_indecomposable(parse("1")));
  EXPECT_FALSE(is_sum_indecomposable(parse("12")));
  EXPECT_TRUE(is_sum_indecomposable(parse("21")));
  EXPECT_FALSE(is_sum_indecomposable(parse("2134")));
  EXPECT_TRUE(is_sum_indecomposable(parse("3142")));
  EXPECT_FALSE(is_sum_indecomposable(Perm{}));
}

TEST(Preimages, InvariantUnderStandardization) {
  for (const Perm& source : {Perm{7, 9, 2, 4}, Perm{50, 20, 60, 10, 40}, Perm{9, 3, 1, 8, 6, 2}}) {
    const Perm pi = stack_sort(source);
    Perm values = pi;
    std::sort(values.begin(), values.end());
    std::uint64_t direct = 0;
    do {
      if (stack_sort(values) == pi) ++direct;
    } while (std::next_permutation(values.begin(), values.end()));
    EXPECT_GT(direct, 0u) << to_string(pi);
    DecompositionCounter dc;
    EXPECT_EQ(preimage_count_brute(standardize(pi)), direct) << to_string(pi);
    EXPECT_EQ(dc.count(pi), direct) << to_string(pi);
  }
}
