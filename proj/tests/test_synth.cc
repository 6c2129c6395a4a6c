#include <gtest/gtest.h>

#include <set>

#include "brackind/eval.h"
#include "brackind/synth.h"

namespace brackind {
namespace {

TEST(Synthetic, DeterministicInSeed) {
  SyntheticConfig c;
  c.sentences = 50;
  const auto a = generate_synthetic(c), b = generate_synthetic(c);
  ASSERT_EQ(a.size(), 50u);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].sentence.tokens, b[k].sentence.tokens);
    EXPECT_EQ(a[k].brackets, b[k].brackets);
  }
  c.seed = 8;
  const auto other = generate_synthetic(c);
  bool differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) differs |= a[k].sentence.tokens != other[k].sentence.tokens;
  EXPECT_TRUE(differs);
}

TEST(Synthetic, RecordsAreWellFormed) {
  SyntheticConfig c;
  const auto records = generate_synthetic(c);
  ASSERT_EQ(records.size(), 500u);
  std::set<std::string> vocab;
  for (const auto& r : records) {
    const int n = r.sentence.size();
    EXPECT_GE(n, c.min_length);
    EXPECT_LE(n, c.max_length);
    ASSERT_TRUE(r.gold.has_value());
    EXPECT_EQ(words_of(*r.gold), r.sentence.tokens);
    EXPECT_EQ(tags_of(*r.gold), r.sentence.pos);
    for (Span b : r.brackets) {
      EXPECT_TRUE(b.valid_for(n));
      EXPECT_GE(b.width(), 2);
      EXPECT_FALSE(b.i == 0 && b.j == n);
    }
    for (const auto& t : r.sentence.tokens) vocab.insert(t);
  }
  EXPECT_LE(static_cast<int>(vocab.size()), kSyntheticVocabSize);
}

TEST(Synthetic, RevealAndCorruptionRates) {
  SyntheticConfig c;
  c.sentences = 2000;
  const auto records = generate_synthetic(c);
  std::size_t gold_spans = 0, brackets = 0, conflicting = 0;
  for (const auto& r : records) {
    const auto gold = nontrivial(phrase_spans(*r.gold), r.sentence.size());
    gold_spans += gold.size();
    brackets += r.brackets.size();
    for (Span b : r.brackets) conflicting += gold.crosses_any(b);
  }
  const double revealed = static_cast<double>(brackets) / gold_spans;
  EXPECT_NEAR(revealed, 0.6, 0.05);
  EXPECT_NEAR(static_cast<double>(conflicting) / brackets, 0.1, 0.03);
}

TEST(Synthetic, NoRevealGivesNoBrackets) {
  SyntheticConfig c;
  c.sentences = 20;
  c.reveal_rate = 0.0;
  for (const auto& r : generate_synthetic(c)) EXPECT_TRUE(r.brackets.empty());
}

}  // namespace
}  // namespace brackind
