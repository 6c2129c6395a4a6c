#include <gtest/gtest.h>

#include <random>

#include "brackind/cky.h"
#include "brackind/cost.h"
#include "oracles.h"

namespace brackind {
namespace {

using testing::hamming_half;
using testing::random_binary_tree;
using testing::random_brackets;

BinaryTree tree3(bool left) {
  const auto l = BinaryTree::leaf(0), m = BinaryTree::leaf(1), r = BinaryTree::leaf(2);
  return left ? BinaryTree::join(BinaryTree::join(l, m), r) : BinaryTree::join(l, BinaryTree::join(m, r));
}

TEST(PreprocessBrackets, Examples) {
  EXPECT_EQ(preprocess_brackets({{0, 1}, {0, 4}, {1, 3}}, 4), (BracketSet{{1, 3}}));
  EXPECT_EQ(preprocess_brackets({}, 4), BracketSet{});
  EXPECT_EQ(preprocess_brackets({{2, 4}, {1, 3}}, 4), (BracketSet{{2, 4}, {1, 3}}));
}

TEST(SpanCost, Examples) {
  EXPECT_EQ(span_cost(CostKind::Strict, {1, 3}, {{1, 3}}), 0);
  EXPECT_EQ(span_cost(CostKind::Loose, {0, 2}, {{1, 3}}), 1);
  EXPECT_EQ(span_cost(CostKind::Loose, {1, 2}, {{1, 3}}), 0);
}

TEST(SpanCost, StrictChargesNonMembers) {
  EXPECT_EQ(span_cost(CostKind::Strict, {0, 2}, {{1, 3}}), 1);
  EXPECT_EQ(span_cost(CostKind::Strict, {0, 2}, {}), 1);
}

TEST(Delta, Examples) {
  EXPECT_EQ(delta(CostKind::Strict, tree3(true), {{1, 3}}), 2);
  EXPECT_EQ(delta(CostKind::Strict, tree3(false), {{1, 3}}), 1);
  std::mt19937_64 rng(1);
  for (int n = 1; n <= 8; ++n) EXPECT_EQ(delta(CostKind::Loose, random_binary_tree(n, rng), {}), 0);
}

TEST(CostKindNames, RoundTrip) {
  EXPECT_EQ(parse_cost_kind(to_string(CostKind::Loose)), CostKind::Loose);
  EXPECT_EQ(parse_cost_kind(to_string(CostKind::Strict)), CostKind::Strict);
  EXPECT_FALSE(parse_cost_kind("medium").has_value());
}

TEST(CostProperties, DeltaBounded) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const auto t = random_binary_tree(n, rng);
    const auto b = random_brackets(n, rng, 6);
    for (auto kind : {CostKind::Loose, CostKind::Strict}) {
      const int d = delta(kind, t, b);
      EXPECT_GE(d, 0);
      EXPECT_LE(d, n - 1);
    }
  }
}

// Holds when y~ is internally consistent: a span that crosses a bracket
// cannot then be a bracket itself.
TEST(CostProperties, LooseImpliesStrictForConsistentBrackets) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 10);
    BracketSet b;
    for (Span s : spans_of_tree(random_binary_tree(n, rng)))
      if (rng() % 2 == 0) b.insert(s);
    b = preprocess_brackets(b, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 2; j <= n; ++j)
        if (span_cost(CostKind::Loose, {i, j}, b) == 1)
          EXPECT_EQ(span_cost(CostKind::Strict, {i, j}, b), 1);
  }
}

TEST(CostProperties, SelfConflictingBracketsBreakLooseImpliesStrict) {
  const BracketSet b{{0, 2}, {1, 3}};
  EXPECT_EQ(span_cost(CostKind::Loose, {0, 2}, b), 1);
  EXPECT_EQ(span_cost(CostKind::Strict, {0, 2}, b), 0);
}

TEST(CostProperties, MatchesIndependentDefinition) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 10);
    const auto b = random_brackets(n, rng, 6);
    for (int i = 0; i < n; ++i)
      for (int j = i + 2; j <= n; ++j)
        for (auto kind : {CostKind::Loose, CostKind::Strict})
          EXPECT_EQ(span_cost(kind, {i, j}, b), testing::oracle_cost(kind, {i, j}, b));
  }
}

// With y~ taken from a full binary tree, both costs agree on every
// non-full span and delta reduces to the Hamming distance between span sets.
// The full span is never in preprocessed y~, so Strict charges it 1 in every
// tree while Loose charges it 0.
TEST(CostProperties, SupervisedCollapseExhaustive) {
  std::mt19937_64 rng(19);
  for (int n = 2; n <= 7; ++n) {
    const auto trees = enumerate_trees(n);
    for (int rep = 0; rep < 4; ++rep) {
      const auto& star = trees[rng() % trees.size()];
      const auto raw = spans_of_tree(star);
      const auto b = preprocess_brackets(BracketSet(raw), n);
      for (int i = 0; i < n; ++i)
        for (int j = i + 2; j <= n; ++j)
          if (!(i == 0 && j == n))
            EXPECT_EQ(span_cost(CostKind::Loose, {i, j}, b), span_cost(CostKind::Strict, {i, j}, b));
      for (const auto& t : trees) {
        const int h = hamming_half(t, star);
        EXPECT_EQ(delta(CostKind::Loose, t, b), h);
        EXPECT_EQ(delta(CostKind::Strict, t, b), h + 1);
      }
    }
  }
}

}  // namespace
}  // namespace brackind
