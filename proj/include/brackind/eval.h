#ifndef BRACKIND_EVAL_H_
#define BRACKIND_EVAL_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "brackind/core.h"
#include "brackind/data.h"

namespace brackind {

struct EvalConfig {
  std::set<std::string> punctuation_tags = {"``", "''", ".", ",", ":", "-LRB-", "-RRB-", "#", "$"};
  bool exclude_empty_gold = true;  // otherwise empty-gold sentences score 0
};

struct Projection {
  int length = 0;  // tokens left after removing punctuation
  BracketSet spans;
};

// Removes punctuation tokens (by POS) and remaps spans onto the remaining
// tokens, dropping spans that become empty. Throws ConfigError without POS.
Projection project_no_punct(std::span<const std::string> pos, const BracketSet& spans,
                            const EvalConfig& config = {});

// Drops width-1 spans and (0, n).
BracketSet nontrivial(const BracketSet& spans, int n);

// Unlabeled span F1; 0 when either set is empty.
double sentence_f1(const BracketSet& pred, const BracketSet& gold);

// Gold side of one evaluated sentence after punctuation and trivial-span
// removal.
struct GoldView {
  int length = 0;
  BracketSet spans;
  std::set<LabeledSpan> labeled;
};

GoldView make_gold_view(const ParsedTree& gold, const EvalConfig& config = {});

// Prediction over the original tokens, filtered like the gold.
BracketSet prepare_prediction(const BracketSet& pred, std::span<const std::string> pos,
                              const EvalConfig& config = {});

struct LabelRecall {
  std::size_t found = 0;
  std::size_t total = 0;
  double recall() const { return total == 0 ? 0.0 : static_cast<double>(found) / total; }
};

struct EvalReport {
  double mean_f1 = 0.0;  // in [0, 1]
  std::size_t included = 0;
  std::size_t excluded = 0;  // empty gold
  std::vector<double> sentence_f1;  // per input sentence; NaN when excluded
  std::map<std::string, LabelRecall> label_recall;
};

// Sentence-level F1 accumulator. Predictions are already filtered.
class EvalAccumulator {
 public:
  explicit EvalAccumulator(EvalConfig config = {}) : config_(std::move(config)) {}
  void add(const BracketSet& prepared_pred, const GoldView& gold);
  EvalReport report() const;

 private:
  EvalConfig config_;
  double sum_ = 0.0;
  EvalReport report_;
};

using Predictor = std::function<BinaryTree(const ParsedTree& gold, std::size_t index)>;

// Mean sentence F1 of predictor output (binary trees over all tokens).
EvalReport corpus_f1(std::span<const ParsedTree> golds, const Predictor& predictor,
                     const EvalConfig& config = {});

// Evaluates paired prediction/gold trees. Throws DataError on length mismatch.
EvalReport evaluate_trees(std::span<const ParsedTree> preds, std::span<const ParsedTree> golds,
                          const EvalConfig& config = {});

BinaryTree left_branching(int n);
BinaryTree right_branching(int n);
// Uniform split point in every span, recursively.
BinaryTree random_tree(int n, std::mt19937_64& rng);

// Binary completion of the gold tree: unary chains collapse, nodes with k > 2
// children are filled left-branching (or right-branching).
BinaryTree binarize(const NaryTree& gold, bool left_fill = true);

// F1 of the binarized gold against the gold; nullopt when the gold has no
// evaluated spans.
std::optional<double> binarized_upper_bound(const ParsedTree& gold, const EvalConfig& config = {});

enum class BaselineKind { Left, Right, Random, Upper };
std::optional<BaselineKind> parse_baseline_kind(std::string_view name);

// Baseline trees are built over the punctuation-free token sequence. For
// Random, `seed` seeds one run.
EvalReport baseline_f1(std::span<const ParsedTree> golds, BaselineKind kind, std::uint64_t seed = 0,
                       const EvalConfig& config = {});

}  // namespace brackind

#endif  // BRACKIND_EVAL_H_
