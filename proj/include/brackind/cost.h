#ifndef BRACKIND_COST_H_
#define BRACKIND_COST_H_

#include <optional>
#include <string_view>

#include "brackind/core.h"

namespace brackind {

// Per-span partial-bracket cost.
//   Loose:  1 iff the span crosses some bracket.
//   Strict: 1 iff the span is not itself a bracket.
enum class CostKind { Loose, Strict };

std::string_view to_string(CostKind kind);
std::optional<CostKind> parse_cost_kind(std::string_view name);

// Drops width-1 brackets and the full-sentence bracket (0, n). Both occur in
// every binary tree.
BracketSet preprocess_brackets(const BracketSet& brackets, int n);

// Expects preprocessed brackets.
int span_cost(CostKind kind, Span s, const BracketSet& brackets);

// Sum of span_cost over the internal spans of t.
int delta(CostKind kind, const BinaryTree& t, const BracketSet& brackets);

}  // namespace brackind

#endif  // BRACKIND_COST_H_
