#ifndef BRACKIND_CORE_H_
#define BRACKIND_CORE_H_

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace brackind {

// Raised when a tree or span table is structurally invalid.
class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Half-open token span [i, j).
struct Span {
  int i = 0;
  int j = 0;

  int width() const { return j - i; }
  bool valid_for(int n) const { return 0 <= i && i < j && j <= n; }

  auto operator<=>(const Span&) const = default;
};

std::string to_string(Span s);

// True iff a and b partially overlap without nesting.
bool crosses(Span a, Span b);

struct Sentence {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<std::string> pos;                    // empty or size n
  std::vector<std::pair<int, int>> char_spans;     // empty or size n

  int size() const { return static_cast<int>(tokens.size()); }
  bool has_pos() const { return !pos.empty(); }

  // Throws std::invalid_argument if the sentence invariants do not hold.
  void validate() const;
};

// Set of spans with duplicates collapsed; crossing members are allowed.
class BracketSet {
 public:
  BracketSet() = default;
  BracketSet(std::initializer_list<Span> spans);
  explicit BracketSet(std::vector<Span> spans);

  void insert(Span s);
  bool contains(Span s) const;
  bool crosses_any(Span s) const;

  bool empty() const { return spans_.empty(); }
  std::size_t size() const { return spans_.size(); }
  const std::vector<Span>& spans() const { return spans_; }
  auto begin() const { return spans_.begin(); }
  auto end() const { return spans_.end(); }

  bool operator==(const BracketSet&) const = default;

 private:
  std::vector<Span> spans_;  // sorted, unique
};

// Full unlabeled binary bracketing over n leaves.
//
// Nodes are stored in preorder; node 0 is the root. Leaves are nodes whose
// span has width 1.
class BinaryTree {
 public:
  struct Node {
    Span span;
    int left = -1;
    int right = -1;
    bool is_leaf() const { return left < 0; }
    bool operator==(const Node&) const = default;
  };

  static BinaryTree leaf(int index);
  // left must end where right begins.
  static BinaryTree join(const BinaryTree& left, const BinaryTree& right);

  int num_leaves() const { return nodes_.front().span.width(); }
  Span span() const { return nodes_.front().span; }
  const std::vector<Node>& nodes() const { return nodes_; }

  bool operator==(const BinaryTree&) const = default;

 private:
  BinaryTree() = default;
  friend BinaryTree tree_from_splits(const std::map<Span, int>&, int);
  std::vector<Node> nodes_;
};

// Internal-node spans (width >= 2), preorder, root first.
std::vector<Span> spans_of_tree(const BinaryTree& t);

// Builds the tree over n leaves whose internal node (i, j) splits at
// splits[(i, j)]. Throws StructureError on a missing or out-of-range entry.
BinaryTree tree_from_splits(const std::map<Span, int>& splits, int n);

// Split table of t; inverse of tree_from_splits.
std::map<Span, int> splits_of_tree(const BinaryTree& t);

// "(X (X 0 1) 2)"-style rendering with token placeholders, for diagnostics.
std::string debug_string(const BinaryTree& t);

// Labeled n-ary tree. Preterminals carry the POS label and one word.
struct NaryTree {
  std::string label;
  std::string word;  // set on preterminals only
  std::vector<NaryTree> children;

  bool is_preterminal() const { return children.empty(); }
};

struct LabeledSpan {
  std::string label;
  Span span;
  auto operator<=>(const LabeledSpan&) const = default;
};

// Number of preterminals under t.
int num_leaves(const NaryTree& t);

// Spans of all phrasal (non-preterminal) nodes with labels, preorder. Unary
// chains produce one entry per node.
std::vector<LabeledSpan> labeled_spans(const NaryTree& t);

// Unlabeled phrasal spans, duplicates collapsed.
BracketSet phrase_spans(const NaryTree& t);

std::vector<std::string> words_of(const NaryTree& t);
std::vector<std::string> tags_of(const NaryTree& t);

}  // namespace brackind

#endif  // BRACKIND_CORE_H_
