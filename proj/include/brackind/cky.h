#ifndef BRACKIND_CKY_H_
#define BRACKIND_CKY_H_

#include <functional>
#include <vector>

#include "brackind/core.h"
#include "brackind/cost.h"

namespace brackind {

// Real score for every span of width >= 2 over n tokens. Width-1 spans score
// 0 and are not stored.
class ScoreChart {
 public:
  explicit ScoreChart(int n);

  int size() const { return n_; }
  double at(Span s) const { return scores_[index(s)]; }
  double& at(Span s) { return scores_[index(s)]; }
  double at(int i, int j) const { return at(Span{i, j}); }
  double& at(int i, int j) { return at(Span{i, j}); }

  // Every width-2+ span, ordered by start then end.
  std::vector<Span> spans() const;

 private:
  std::size_t index(Span s) const;
  int n_;
  std::vector<double> scores_;  // (n+1) x (n+1), upper triangle used
};

// s(y): sum of chart scores over the internal spans of t.
double tree_score(const ScoreChart& chart, const BinaryTree& t);

struct Decoded {
  BinaryTree tree;
  double score;
};

// Exact argmax over binary trees, O(n^3). Ties go to the smallest split
// point in each cell.
Decoded decode_scored(const ScoreChart& chart);
BinaryTree decode(const ScoreChart& chart);

// argmax of s(y) + sign * delta(kind, y, brackets). The returned score is the
// augmented one. sign must be +1 or -1.
Decoded decode_with_cost(const ScoreChart& chart, const BracketSet& brackets, CostKind kind,
                         int sign);

// Exhaustive enumeration, used as a test oracle. Throws std::invalid_argument
// for n < 1 or n > max_n.
inline constexpr int kDefaultEnumerationBound = 10;
void for_each_tree(int n, const std::function<void(const BinaryTree&)>& visit,
                   int max_n = kDefaultEnumerationBound);
std::vector<BinaryTree> enumerate_trees(int n, int max_n = kDefaultEnumerationBound);

}  // namespace brackind

#endif  // BRACKIND_CKY_H_
