#include "brackind/cost.h"

namespace brackind {

std::string_view to_string(CostKind kind) {
  return kind == CostKind::Loose ? "loose" : "strict";
}

std::optional<CostKind> parse_cost_kind(std::string_view name) {
  if (name == "loose") return CostKind::Loose;
  if (name == "strict") return CostKind::Strict;
  return std::nullopt;
}

BracketSet preprocess_brackets(const BracketSet& brackets, int n) {
  BracketSet out;
  for (Span s : brackets)
    if (s.width() >= 2 && !(s.i == 0 && s.j == n)) out.insert(s);
  return out;
}

int span_cost(CostKind kind, Span s, const BracketSet& brackets) {
  switch (kind) {
    case CostKind::Loose:
      return brackets.crosses_any(s) ? 1 : 0;
    case CostKind::Strict:
      return brackets.contains(s) ? 0 : 1;
  }
  return 0;
}

int delta(CostKind kind, const BinaryTree& t, const BracketSet& brackets) {
  int total = 0;
  for (Span s : spans_of_tree(t)) total += span_cost(kind, s, brackets);
  return total;
}

}  // namespace brackind
