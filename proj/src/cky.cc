#include "brackind/cky.h"

#include <cmath>
#include <map>
#include <stdexcept>

namespace brackind {

ScoreChart::ScoreChart(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("score chart needs n >= 1");
  scores_.assign(static_cast<std::size_t>(n + 1) * (n + 1), 0.0);
}

std::size_t ScoreChart::index(Span s) const {
  return static_cast<std::size_t>(s.i) * (n_ + 1) + s.j;
}

std::vector<Span> ScoreChart::spans() const {
  std::vector<Span> out;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 2; j <= n_; ++j) out.push_back({i, j});
  return out;
}

double tree_score(const ScoreChart& chart, const BinaryTree& t) {
  double total = 0.0;
  for (Span s : spans_of_tree(t)) total += chart.at(s);
  return total;
}

Decoded decode_scored(const ScoreChart& chart) {
  const int n = chart.size();
  std::vector<double> best(static_cast<std::size_t>(n + 1) * (n + 1), 0.0);
  auto cell = [&](int i, int j) -> double& { return best[static_cast<std::size_t>(i) * (n + 1) + j]; };
  std::map<Span, int> splits;

  for (int width = 2; width <= n; ++width) {
    for (int i = 0; i + width <= n; ++i) {
      const int j = i + width;
      int arg = i + 1;
      double top = cell(i, arg) + cell(arg, j);
      for (int k = i + 2; k < j; ++k) {
        const double candidate = cell(i, k) + cell(k, j);
        if (candidate > top) {
          top = candidate;
          arg = k;
        }
      }
      cell(i, j) = top + chart.at(i, j);
      splits[{i, j}] = arg;
    }
  }
  return {tree_from_splits(splits, n), cell(0, n)};
}

BinaryTree decode(const ScoreChart& chart) { return decode_scored(chart).tree; }

Decoded decode_with_cost(const ScoreChart& chart, const BracketSet& brackets, CostKind kind,
                         int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("cost sign must be +1 or -1");
  ScoreChart augmented = chart;
  for (Span s : chart.spans()) augmented.at(s) += sign * span_cost(kind, s, brackets);
  return decode_scored(augmented);
}

namespace {

const std::vector<BinaryTree>& trees_over(Span span, std::map<Span, std::vector<BinaryTree>>& memo) {
  if (auto it = memo.find(span); it != memo.end()) return it->second;
  std::vector<BinaryTree> out;
  if (span.width() == 1) {
    out.push_back(BinaryTree::leaf(span.i));
  } else {
    for (int k = span.i + 1; k < span.j; ++k) {
      const auto& lefts = trees_over({span.i, k}, memo);
      const auto& rights = trees_over({k, span.j}, memo);
      for (const auto& l : lefts)
        for (const auto& r : rights) out.push_back(BinaryTree::join(l, r));
    }
  }
  return memo.emplace(span, std::move(out)).first->second;
}

}  // namespace

void for_each_tree(int n, const std::function<void(const BinaryTree&)>& visit, int max_n) {
  if (n < 1) throw std::invalid_argument("tree enumeration needs n >= 1");
  if (n > max_n)
    throw std::invalid_argument("refusing to enumerate trees over " + std::to_string(n) +
                                " leaves (bound " + std::to_string(max_n) + ")");
  std::map<Span, std::vector<BinaryTree>> memo;
  for (const auto& t : trees_over({0, n}, memo)) visit(t);
}

std::vector<BinaryTree> enumerate_trees(int n, int max_n) {
  std::vector<BinaryTree> out;
  for_each_tree(n, [&](const BinaryTree& t) { out.push_back(t); }, max_n);
  return out;
}

}  // namespace brackind
