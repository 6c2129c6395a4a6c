#include "brackind/synth.h"

#include <array>
#include <random>
#include <string>

#include "brackind/cost.h"

namespace brackind {

namespace {

struct WordClass {
  const char* tag;
  const char* stem;
  int size;
};

// 5 + 8 + 14 + 4 + 10 + 5 + 3 + 1 = 50 words.
constexpr std::array<WordClass, 8> kClasses = {{
    {"DT", "det", 5},
    {"JJ", "adj", 8},
    {"NN", "noun", 14},
    {"PRP", "pron", 4},
    {"VB", "verb", 10},
    {"IN", "prep", 5},
    {"RB", "adv", 3},
    {"C", "comp", 1},
}};

enum Cls { kDet, kAdj, kNoun, kPron, kVerb, kPrep, kAdv, kComp };

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  NaryTree sentence() { return s(0); }
  std::mt19937_64& rng() { return rng_; }

 private:
  static constexpr int kMaxDepth = 3;

  NaryTree word(Cls c) {
    const WordClass& wc = kClasses[c];
    std::uniform_int_distribution<int> pick(0, wc.size - 1);
    NaryTree leaf;
    leaf.label = wc.tag;
    leaf.word = std::string(wc.stem) + std::to_string(pick(rng_));
    return leaf;
  }

  static NaryTree phrase(const char* label, std::vector<NaryTree> children) {
    NaryTree t;
    t.label = label;
    t.children = std::move(children);
    return t;
  }

  int choose(std::initializer_list<double> weights) {
    std::discrete_distribution<int> d(weights);
    return d(rng_);
  }

  NaryTree s(int depth) { return phrase("S", {np(depth + 1), vp(depth + 1)}); }

  NaryTree np(int depth) {
    const bool deep = depth >= kMaxDepth;
    switch (choose({0.45, 0.25, deep ? 0.0 : 0.15, 0.15})) {
      case 0: return phrase("NP", {word(kDet), word(kNoun)});
      case 1: return phrase("NP", {word(kDet), word(kAdj), word(kNoun)});
      case 2: return phrase("NP", {np(depth + 1), pp(depth + 1)});
      default: return phrase("NP", {word(kPron)});
    }
  }

  NaryTree pp(int depth) { return phrase("PP", {word(kPrep), np(depth + 1)}); }

  NaryTree vp(int depth) {
    const bool deep = depth >= kMaxDepth;
    switch (choose({0.4, deep ? 0.0 : 0.2, 0.1, deep ? 0.0 : 0.15, 0.15})) {
      case 0: return phrase("VP", {word(kVerb), np(depth + 1)});
      case 1: return phrase("VP", {word(kVerb), np(depth + 1), pp(depth + 1)});
      case 2: return phrase("VP", {word(kVerb)});
      case 3: return phrase("VP", {word(kVerb), phrase("SBAR", {word(kComp), s(depth + 2)})});
      default: return phrase("VP", {word(kVerb), word(kAdv)});
    }
  }

  std::mt19937_64 rng_;
};

// A uniformly chosen width >= 2 non-full span crossing s, if any exists.
std::optional<Span> crossing_span(Span s, int n, std::mt19937_64& rng) {
  std::vector<Span> candidates;
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j <= n; ++j) {
      const Span c{i, j};
      if (!(i == 0 && j == n) && crosses(c, s)) candidates.push_back(c);
    }
  if (candidates.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  return candidates[pick(rng)];
}

}  // namespace

std::vector<CorpusRecord> generate_synthetic(const SyntheticConfig& config) {
  Generator gen(config.seed);
  std::bernoulli_distribution reveal(config.reveal_rate);
  std::bernoulli_distribution corrupt(config.corrupt_rate);
  std::vector<CorpusRecord> out;
  out.reserve(config.sentences);
  while (static_cast<int>(out.size()) < config.sentences) {
    NaryTree tree = gen.sentence();
    const int n = num_leaves(tree);
    if (n < config.min_length || n > config.max_length) continue;

    CorpusRecord rec;
    rec.sentence.id = "synth-" + std::to_string(out.size());
    rec.sentence.tokens = words_of(tree);
    rec.sentence.pos = tags_of(tree);
    for (Span s : preprocess_brackets(phrase_spans(tree), n)) {
      if (!reveal(gen.rng())) continue;
      if (corrupt(gen.rng())) {
        if (auto c = crossing_span(s, n, gen.rng())) rec.brackets.insert(*c);
        continue;
      }
      rec.brackets.insert(s);
    }
    rec.gold = std::move(tree);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace brackind
