#include "brackind/core.h"

#include <algorithm>
#include <sstream>

namespace brackind {

std::string to_string(Span s) {
  return "(" + std::to_string(s.i) + "," + std::to_string(s.j) + ")";
}

bool crosses(Span a, Span b) {
  return (a.i < b.i && b.i < a.j && a.j < b.j) ||
         (b.i < a.i && a.i < b.j && b.j < a.j);
}

void Sentence::validate() const {
  const auto n = tokens.size();
  if (n == 0) throw std::invalid_argument("sentence '" + id + "' has no tokens");
  if (!pos.empty() && pos.size() != n)
    throw std::invalid_argument("sentence '" + id + "': pos length " +
                                std::to_string(pos.size()) + " != " + std::to_string(n));
  if (!char_spans.empty()) {
    if (char_spans.size() != n)
      throw std::invalid_argument("sentence '" + id + "': char_spans length mismatch");
    int prev_end = -1;
    for (const auto& [b, e] : char_spans) {
      if (b < prev_end || e <= b)
        throw std::invalid_argument("sentence '" + id +
                                    "': char_spans must be non-empty, increasing and disjoint");
      prev_end = e;
    }
  }
}

BracketSet::BracketSet(std::initializer_list<Span> spans)
    : BracketSet(std::vector<Span>(spans)) {}

BracketSet::BracketSet(std::vector<Span> spans) : spans_(std::move(spans)) {
  std::sort(spans_.begin(), spans_.end());
  spans_.erase(std::unique(spans_.begin(), spans_.end()), spans_.end());
}

void BracketSet::insert(Span s) {
  auto it = std::lower_bound(spans_.begin(), spans_.end(), s);
  if (it == spans_.end() || *it != s) spans_.insert(it, s);
}

bool BracketSet::contains(Span s) const {
  return std::binary_search(spans_.begin(), spans_.end(), s);
}

bool BracketSet::crosses_any(Span s) const {
  return std::any_of(spans_.begin(), spans_.end(),
                     [s](Span b) { return crosses(s, b); });
}

BinaryTree BinaryTree::leaf(int index) {
  BinaryTree t;
  t.nodes_.push_back({Span{index, index + 1}, -1, -1});
  return t;
}

BinaryTree BinaryTree::join(const BinaryTree& left, const BinaryTree& right) {
  if (left.span().j != right.span().i)
    throw StructureError("cannot join non-adjacent subtrees " + to_string(left.span()) +
                         " and " + to_string(right.span()));
  BinaryTree t;
  const int offset_left = 1;
  const int offset_right = 1 + static_cast<int>(left.nodes_.size());
  t.nodes_.reserve(1 + left.nodes_.size() + right.nodes_.size());
  t.nodes_.push_back({Span{left.span().i, right.span().j}, offset_left, offset_right});
  for (Node node : left.nodes_) {
    if (!node.is_leaf()) {
      node.left += offset_left;
      node.right += offset_left;
    }
    t.nodes_.push_back(node);
  }
  for (Node node : right.nodes_) {
    if (!node.is_leaf()) {
      node.left += offset_right;
      node.right += offset_right;
    }
    t.nodes_.push_back(node);
  }
  return t;
}

std::vector<Span> spans_of_tree(const BinaryTree& t) {
  std::vector<Span> out;
  out.reserve(t.nodes().size() / 2);
  for (const auto& node : t.nodes())
    if (!node.is_leaf()) out.push_back(node.span);
  return out;
}

namespace {

void build_from_splits(const std::map<Span, int>& splits, Span span,
                       std::vector<BinaryTree::Node>& nodes) {
  const int self = static_cast<int>(nodes.size());
  nodes.push_back({span, -1, -1});
  if (span.width() == 1) return;
  auto it = splits.find(span);
  if (it == splits.end())
    throw StructureError("missing split for span " + to_string(span));
  const int k = it->second;
  if (k <= span.i || k >= span.j)
    throw StructureError("split " + std::to_string(k) + " out of range for span " +
                         to_string(span));
  nodes[self].left = static_cast<int>(nodes.size());
  build_from_splits(splits, Span{span.i, k}, nodes);
  nodes[self].right = static_cast<int>(nodes.size());
  build_from_splits(splits, Span{k, span.j}, nodes);
}

void write_debug(const BinaryTree& t, int node, std::ostringstream& out) {
  const auto& nd = t.nodes()[node];
  if (nd.is_leaf()) {
    out << nd.span.i;
    return;
  }
  out << "(";
  write_debug(t, nd.left, out);
  out << " ";
  write_debug(t, nd.right, out);
  out << ")";
}

}  // namespace

BinaryTree tree_from_splits(const std::map<Span, int>& splits, int n) {
  if (n < 1) throw StructureError("tree needs at least one leaf");
  BinaryTree t;
  t.nodes_.reserve(2 * n - 1);
  build_from_splits(splits, Span{0, n}, t.nodes_);
  return t;
}

std::map<Span, int> splits_of_tree(const BinaryTree& t) {
  std::map<Span, int> splits;
  for (const auto& node : t.nodes())
    if (!node.is_leaf()) splits[node.span] = t.nodes()[node.left].span.j;
  return splits;
}

std::string debug_string(const BinaryTree& t) {
  std::ostringstream out;
  write_debug(t, 0, out);
  return out.str();
}

namespace {

int collect_spans(const NaryTree& t, int start, std::vector<LabeledSpan>& out) {
  if (t.is_preterminal()) return start + 1;
  const std::size_t self = out.size();
  out.push_back({t.label, Span{start, start}});
  int end = start;
  for (const auto& child : t.children) end = collect_spans(child, end, out);
  out[self].span.j = end;
  return end;
}

void collect_leaves(const NaryTree& t, std::vector<std::string>& words,
                    std::vector<std::string>& tags) {
  if (t.is_preterminal()) {
    words.push_back(t.word);
    tags.push_back(t.label);
    return;
  }
  for (const auto& child : t.children) collect_leaves(child, words, tags);
}

}  // namespace

int num_leaves(const NaryTree& t) {
  if (t.is_preterminal()) return 1;
  int n = 0;
  for (const auto& child : t.children) n += num_leaves(child);
  return n;
}

std::vector<LabeledSpan> labeled_spans(const NaryTree& t) {
  std::vector<LabeledSpan> out;
  collect_spans(t, 0, out);
  return out;
}

BracketSet phrase_spans(const NaryTree& t) {
  std::vector<Span> spans;
  for (const auto& ls : labeled_spans(t)) spans.push_back(ls.span);
  return BracketSet(std::move(spans));
}

std::vector<std::string> words_of(const NaryTree& t) {
  std::vector<std::string> words, tags;
  collect_leaves(t, words, tags);
  return words;
}

std::vector<std::string> tags_of(const NaryTree& t) {
  std::vector<std::string> words, tags;
  collect_leaves(t, words, tags);
  return tags;
}

}  // namespace brackind
