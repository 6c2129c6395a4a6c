// Independent reference computations used by the unit and acceptance suites.
// Nothing here goes through the CKY decoder or the analytic backward pass.
#ifndef BRACKIND_TESTS_ORACLES_H_
#define BRACKIND_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "brackind/cky.h"
#include "brackind/cost.h"
#include "brackind/model.h"

namespace brackind::testing {

inline ScoreChart random_chart(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  ScoreChart chart(n);
  for (Span s : chart.spans()) chart.at(s) = dist(rng);
  return chart;
}

inline BracketSet random_brackets(int n, std::mt19937_64& rng, int max_count = 4) {
  std::uniform_int_distribution<int> count(0, max_count);
  std::uniform_int_distribution<int> start(0, n - 1);
  std::vector<Span> spans;
  const int k = count(rng);
  for (int t = 0; t < k; ++t) {
    const int i = start(rng);
    std::uniform_int_distribution<int> end(i + 1, n);
    spans.push_back({i, end(rng)});
  }
  return preprocess_brackets(BracketSet(spans), n);
}

// Direct summation over a span list, independent of tree_score.
inline double sum_scores(const ScoreChart& chart, const std::vector<Span>& spans) {
  double total = 0.0;
  for (Span s : spans) total += chart.at(s);
  return total;
}

// Indicator costs written out from their definitions, independent of cost.cc.
inline int oracle_cost(CostKind kind, Span s, const BracketSet& brackets) {
  for (Span b : brackets) {
    const bool member = b == s;
    const bool cross = (s.i < b.i && b.i < s.j && s.j < b.j) || (b.i < s.i && s.i < b.j && b.j < s.j);
    if (kind == CostKind::Strict && member) return 0;
    if (kind == CostKind::Loose && cross) return 1;
  }
  return kind == CostKind::Strict ? 1 : 0;
}

// max over all trees of s(y) + sign * delta(y), by exhaustive enumeration.
inline double brute_force_max(const ScoreChart& chart, const BracketSet& brackets, CostKind kind,
                              int sign) {
  double best = -std::numeric_limits<double>::infinity();
  for_each_tree(chart.size(), [&](const BinaryTree& t) {
    double v = 0.0;
    for (Span s : spans_of_tree(t)) v += chart.at(s) + sign * oracle_cost(kind, s, brackets);
    best = std::max(best, v);
  });
  return best;
}

inline double brute_force_max(const ScoreChart& chart) {
  double best = -std::numeric_limits<double>::infinity();
  for_each_tree(chart.size(),
                [&](const BinaryTree& t) { best = std::max(best, sum_scores(chart, spans_of_tree(t))); });
  return best;
}

inline std::set<Span> nontrivial_set(const std::vector<Span>& spans, int n) {
  std::set<Span> out;
  for (Span s : spans)
    if (s.width() >= 2 && !(s.i == 0 && s.j == n)) out.insert(s);
  return out;
}

// |A symmetric-difference B| / 2 over non-trivial spans.
inline int hamming_half(const BinaryTree& a, const BinaryTree& b) {
  const int n = a.num_leaves();
  const auto sa = nontrivial_set(spans_of_tree(a), n);
  const auto sb = nontrivial_set(spans_of_tree(b), n);
  std::vector<Span> diff;
  std::set_symmetric_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(diff));
  return static_cast<int>(diff.size()) / 2;
}

inline BinaryTree random_binary_tree(int n, std::mt19937_64& rng) {
  std::function<BinaryTree(int, int)> build = [&](int i, int j) {
    if (j - i == 1) return BinaryTree::leaf(i);
    std::uniform_int_distribution<int> split(i + 1, j - 1);
    const int k = split(rng);
    BinaryTree left = build(i, k);
    return BinaryTree::join(left, build(k, j));
  };
  return build(0, n);
}

inline ModelParams random_params(int input_dim, int hidden, int vocab, std::mt19937_64& rng) {
  ModelParams p = init_params(input_dim, hidden, vocab, rng());
  std::normal_distribution<double> dist(0.0, 0.5);
  // Non-zero biases so that every parameter group has a non-trivial gradient.
  for (double& b : p.left.bias) b = dist(rng);
  for (double& b : p.right.bias) b = dist(rng);
  return p;
}

inline Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data) v = dist(rng);
  return m;
}

struct GroupError {
  double relative_error;
  double analytic_norm;
};

// Central finite differences of `objective` w.r.t. every entry of every
// parameter group, compared with `analytic` (same layout). Returns the
// relative error ||a - fd|| / max(||a||, ||fd||, 1e-6) per group. The floor
// keeps rounding noise in the objective from dominating groups whose true
// gradient is zero.
inline std::vector<GroupError> finite_difference_check(
    ModelParams params, const ModelParams& analytic,
    const std::function<double(const ModelParams&)>& objective, double eps = 1e-4) {
  std::vector<std::vector<double>*> groups;
  params.for_each_group([&](std::vector<double>& g) { groups.push_back(&g); });
  std::vector<const std::vector<double>*> expected;
  analytic.for_each_group([&](const std::vector<double>& g) { expected.push_back(&g); });

  std::vector<GroupError> out;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    auto& g = *groups[k];
    double diff_sq = 0.0, a_sq = 0.0, fd_sq = 0.0;
    for (std::size_t t = 0; t < g.size(); ++t) {
      const double saved = g[t];
      g[t] = saved + eps;
      const double up = objective(params);
      g[t] = saved - eps;
      const double down = objective(params);
      g[t] = saved;
      const double fd = (up - down) / (2.0 * eps);
      const double a = (*expected[k])[t];
      diff_sq += (a - fd) * (a - fd);
      a_sq += a * a;
      fd_sq += fd * fd;
    }
    const double denom = std::max({std::sqrt(a_sq), std::sqrt(fd_sq), 1e-6});
    out.push_back({std::sqrt(diff_sq) / denom, std::sqrt(a_sq)});
  }
  return out;
}

}  // namespace brackind::testing

#endif  // BRACKIND_TESTS_ORACLES_H_
