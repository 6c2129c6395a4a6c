#include "brackind/eval.h"

#include <cmath>
#include <limits>

#include "brackind/model.h"

namespace brackind {

namespace {

// new_index[t] for t in [0, n]: surviving tokens before position t.
std::vector<int> surviving_prefix(std::span<const std::string> pos, const EvalConfig& config) {
  std::vector<int> prefix(pos.size() + 1, 0);
  for (std::size_t t = 0; t < pos.size(); ++t)
    prefix[t + 1] = prefix[t] + (config.punctuation_tags.contains(pos[t]) ? 0 : 1);
  return prefix;
}

Span remap(Span s, const std::vector<int>& prefix) { return {prefix[s.i], prefix[s.j]}; }

}  // namespace

Projection project_no_punct(std::span<const std::string> pos, const BracketSet& spans,
                            const EvalConfig& config) {
  if (pos.empty()) throw ConfigError("punctuation filtering needs POS tags");
  if (config.punctuation_tags.empty()) throw ConfigError("empty punctuation tag set");
  const auto prefix = surviving_prefix(pos, config);
  Projection out;
  out.length = prefix.back();
  for (Span s : spans) {
    if (s.j > static_cast<int>(pos.size()))
      throw ConfigError("span " + to_string(s) + " exceeds sentence length");
    const Span r = remap(s, prefix);
    if (r.width() > 0) out.spans.insert(r);
  }
  return out;
}

BracketSet nontrivial(const BracketSet& spans, int n) {
  BracketSet out;
  for (Span s : spans)
    if (s.width() >= 2 && !(s.i == 0 && s.j == n)) out.insert(s);
  return out;
}

double sentence_f1(const BracketSet& pred, const BracketSet& gold) {
  if (pred.empty() || gold.empty()) return 0.0;
  std::size_t overlap = 0;
  for (Span s : pred)
    if (gold.contains(s)) ++overlap;
  if (overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / pred.size();
  const double r = static_cast<double>(overlap) / gold.size();
  return 2.0 * p * r / (p + r);
}

GoldView make_gold_view(const ParsedTree& gold, const EvalConfig& config) {
  const auto& pos = gold.sentence.pos;
  if (pos.empty()) throw ConfigError("gold tree has no POS tags");
  const auto prefix = surviving_prefix(pos, config);
  GoldView view;
  view.length = prefix.back();
  for (const auto& ls : labeled_spans(gold.tree)) {
    const Span r = remap(ls.span, prefix);
    if (r.width() < 2 || (r.i == 0 && r.j == view.length)) continue;
    view.spans.insert(r);
    view.labeled.insert({ls.label, r});
  }
  return view;
}

BracketSet prepare_prediction(const BracketSet& pred, std::span<const std::string> pos,
                              const EvalConfig& config) {
  const Projection p = project_no_punct(pos, pred, config);
  return nontrivial(p.spans, p.length);
}

void EvalAccumulator::add(const BracketSet& prepared_pred, const GoldView& gold) {
  for (const auto& ls : gold.labeled) {
    auto& lr = report_.label_recall[ls.label];
    ++lr.total;
    if (prepared_pred.contains(ls.span)) ++lr.found;
  }
  if (gold.spans.empty() && config_.exclude_empty_gold) {
    ++report_.excluded;
    report_.sentence_f1.push_back(std::numeric_limits<double>::quiet_NaN());
    return;
  }
  const double f1 = sentence_f1(prepared_pred, gold.spans);
  sum_ += f1;
  ++report_.included;
  report_.sentence_f1.push_back(f1);
}

EvalReport EvalAccumulator::report() const {
  EvalReport r = report_;
  r.mean_f1 = r.included == 0 ? 0.0 : sum_ / static_cast<double>(r.included);
  return r;
}

EvalReport corpus_f1(std::span<const ParsedTree> golds, const Predictor& predictor,
                     const EvalConfig& config) {
  EvalAccumulator acc(config);
  for (std::size_t k = 0; k < golds.size(); ++k) {
    const ParsedTree& gold = golds[k];
    const BinaryTree pred = predictor(gold, k);
    if (pred.num_leaves() != gold.sentence.size())
      throw DataError("prediction for sentence " + std::to_string(k + 1) + " has " +
                      std::to_string(pred.num_leaves()) + " leaves, gold has " +
                      std::to_string(gold.sentence.size()));
    acc.add(prepare_prediction(BracketSet(spans_of_tree(pred)), gold.sentence.pos, config),
            make_gold_view(gold, config));
  }
  return acc.report();
}

EvalReport evaluate_trees(std::span<const ParsedTree> preds, std::span<const ParsedTree> golds,
                          const EvalConfig& config) {
  if (preds.size() != golds.size())
    throw DataError("prediction file has " + std::to_string(preds.size()) +
                    " trees, gold file has " + std::to_string(golds.size()));
  EvalAccumulator acc(config);
  for (std::size_t k = 0; k < golds.size(); ++k) {
    if (preds[k].sentence.size() != golds[k].sentence.size())
      throw DataError("tree " + std::to_string(k + 1) + ": prediction has " +
                      std::to_string(preds[k].sentence.size()) + " tokens, gold has " +
                      std::to_string(golds[k].sentence.size()));
    acc.add(prepare_prediction(phrase_spans(preds[k].tree), golds[k].sentence.pos, config),
            make_gold_view(golds[k], config));
  }
  return acc.report();
}

BinaryTree left_branching(int n) {
  if (n < 1) throw std::invalid_argument("left_branching needs n >= 1");
  BinaryTree t = BinaryTree::leaf(0);
  for (int k = 1; k < n; ++k) t = BinaryTree::join(t, BinaryTree::leaf(k));
  return t;
}

BinaryTree right_branching(int n) {
  if (n < 1) throw std::invalid_argument("right_branching needs n >= 1");
  BinaryTree t = BinaryTree::leaf(n - 1);
  for (int k = n - 2; k >= 0; --k) t = BinaryTree::join(BinaryTree::leaf(k), t);
  return t;
}

namespace {

BinaryTree random_subtree(int i, int j, std::mt19937_64& rng) {
  if (j - i == 1) return BinaryTree::leaf(i);
  std::uniform_int_distribution<int> split(i + 1, j - 1);
  const int k = split(rng);
  BinaryTree left = random_subtree(i, k, rng);
  return BinaryTree::join(left, random_subtree(k, j, rng));
}

BinaryTree binarize_at(const NaryTree& node, int& next_leaf, bool left_fill) {
  if (node.is_preterminal()) return BinaryTree::leaf(next_leaf++);
  std::vector<BinaryTree> parts;
  parts.reserve(node.children.size());
  for (const auto& c : node.children) parts.push_back(binarize_at(c, next_leaf, left_fill));
  if (left_fill) {
    BinaryTree t = parts.front();
    for (std::size_t k = 1; k < parts.size(); ++k) t = BinaryTree::join(t, parts[k]);
    return t;
  }
  BinaryTree t = parts.back();
  for (std::size_t k = parts.size() - 1; k-- > 0;) t = BinaryTree::join(parts[k], t);
  return t;
}

}  // namespace

BinaryTree random_tree(int n, std::mt19937_64& rng) {
  if (n < 1) throw std::invalid_argument("random_tree needs n >= 1");
  return random_subtree(0, n, rng);
}

BinaryTree binarize(const NaryTree& gold, bool left_fill) {
  int next_leaf = 0;
  return binarize_at(gold, next_leaf, left_fill);
}

std::optional<double> binarized_upper_bound(const ParsedTree& gold, const EvalConfig& config) {
  const GoldView view = make_gold_view(gold, config);
  if (view.spans.empty()) return std::nullopt;
  const BracketSet pred = prepare_prediction(BracketSet(spans_of_tree(binarize(gold.tree))),
                                             gold.sentence.pos, config);
  return sentence_f1(pred, view.spans);
}

std::optional<BaselineKind> parse_baseline_kind(std::string_view name) {
  if (name == "left") return BaselineKind::Left;
  if (name == "right") return BaselineKind::Right;
  if (name == "random") return BaselineKind::Random;
  if (name == "upper") return BaselineKind::Upper;
  return std::nullopt;
}

EvalReport baseline_f1(std::span<const ParsedTree> golds, BaselineKind kind, std::uint64_t seed,
                       const EvalConfig& config) {
  EvalAccumulator acc(config);
  std::mt19937_64 rng(seed);
  for (const auto& gold : golds) {
    const GoldView view = make_gold_view(gold, config);
    BracketSet pred;
    if (kind == BaselineKind::Upper) {
      pred = prepare_prediction(BracketSet(spans_of_tree(binarize(gold.tree))), gold.sentence.pos,
                                config);
    } else if (view.length >= 1) {
      const int n = view.length;
      const BinaryTree t = kind == BaselineKind::Left    ? left_branching(n)
                           : kind == BaselineKind::Right ? right_branching(n)
                                                         : random_tree(n, rng);
      pred = nontrivial(BracketSet(spans_of_tree(t)), n);
    }
    acc.add(pred, view);
  }
  return acc.report();
}

}  // namespace brackind
