#pragma once

#include <optional>
#include <vector>

#include "fedmesh/ast.hpp"
#include "fedmesh/binding.hpp"
#include "fedmesh/store.hpp"

namespace fedmesh {

/// Replaces variables that are bound in `row` with their terms.
TriplePattern substitute(const TriplePattern& pattern, const BindingRow& row);

/// Three-valued filter expression evaluation: nullopt is the error value
/// (unbound variable, type error, malformed regex).
std::optional<bool> eval_expr(const Expr& expr, const BindingRow& row);

/// True when every expression evaluates to true; errors eliminate the row.
bool filters_pass(const std::vector<ExprPtr>& filters, const BindingRow& row);

/// Evaluates a graph pattern against one store with bag semantics. Within a
/// single BGP the result is duplicate-free because the store is a set;
/// duplicates only ever come from UNION branches.
std::vector<BindingRow> eval_pattern(const Store& store, const GraphPattern& pattern);

/// Applies the solution modifier pipeline to already-evaluated rows, in this
/// order: grouping/COUNT, ORDER BY, projection, DISTINCT, OFFSET, LIMIT.
/// For ASK queries the rows collapse into the boolean.
SolutionSeq apply_modifiers(const Query& query, std::vector<BindingRow> rows);

/// Full centralized evaluation of a query against one store.
SolutionSeq evaluate(const Store& store, const Query& query);

}  // namespace fedmesh
