#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fedmesh/ast.hpp"
#include "fedmesh/term.hpp"

namespace fedmesh {

struct PlanNode;
using PlanPtr = std::shared_ptr<const PlanNode>;

/// Physical plan tree. Pattern leaves perform bound joins against every
/// relevant endpoint; an ExclusiveGroup travels as one conjunctive subquery
/// to its single endpoint. Join children execute left to right, feeding
/// their rows into the next child as bindings.
struct PlanNode {
    enum class Kind { Empty, Pattern, ExclusiveGroup, Join, Union, LeftJoin, Filter };

    Kind kind;

    // Pattern
    TriplePattern pattern;
    std::vector<std::string> sources;  // relevant endpoint ids, member order

    // ExclusiveGroup
    std::vector<TriplePattern> patterns;
    std::string source;

    // Filter (mediator-side) and ExclusiveGroup (pushed into the subquery)
    std::vector<ExprPtr> filters;

    // Join (ordered), Union (2), LeftJoin (2), Filter (1)
    std::vector<PlanPtr> children;

    /// Filter/LeftJoin only: true when input bindings may flow through this
    /// node without changing results. A filter whose variables are not all
    /// bound inside its child, or an optional whose right side mentions
    /// variables from outside its left side, must evaluate bottom-up to stay
    /// exactly equivalent to the centralized engine.
    bool seed_safe = true;

    // Empty: the pattern whose empty relevant set short-circuited the BGP.
    std::string empty_reason;

    static PlanPtr empty(std::string reason);
    static PlanPtr leaf(TriplePattern pattern, std::vector<std::string> sources);
    static PlanPtr exclusive_group(std::vector<TriplePattern> patterns, std::string source,
                                   std::vector<ExprPtr> filters);
    static PlanPtr join(std::vector<PlanPtr> children);
    static PlanPtr union_(PlanPtr left, PlanPtr right);
    static PlanPtr left_join(PlanPtr left, PlanPtr right, bool seed_safe);
    static PlanPtr filter(PlanPtr child, std::vector<ExprPtr> filters, bool seed_safe);

    /// Distinct variable names bound somewhere in this subtree, in first
    /// occurrence order.
    std::vector<std::string> variables() const;

    /// Every triple pattern in the subtree, in plan order. The multiset
    /// equals the parsed query's patterns.
    std::vector<TriplePattern> all_patterns() const;

    /// Compact one-line rendering, e.g. "Join(EG[2]@m1, Pattern{2})".
    std::string describe() const;
};

/// Source selection outcome for one query pattern.
struct SourceDecision {
    TriplePattern pattern;
    std::vector<std::string> relevant;  // endpoint ids, member order
    std::size_t probed = 0;             // members answered by an ASK request
    std::size_t cached = 0;             // members answered from the cache
};

/// Index-aligned with the query's patterns in syntactic order.
using SourceMap = std::vector<SourceDecision>;

/// Accounting for one mediate() call. Totals equal the sum of the
/// per-endpoint breakdowns; endpoint counter deltas agree when no other
/// queries run concurrently.
struct ExecutionTrace {
    std::uint64_t ask_requests = 0;
    std::uint64_t select_requests = 0;
    std::uint64_t ask_saved = 0;  // probes answered from the cache

    std::map<std::string, std::uint64_t> per_endpoint_ask;
    std::map<std::string, std::uint64_t> per_endpoint_select;

    /// Relevant endpoint count per query pattern, in syntactic order.
    std::vector<std::size_t> relevant_per_pattern;

    /// Patterns whose empty relevant set short-circuited their BGP.
    std::vector<std::string> short_circuits;

    /// Members skipped as unreachable during source selection.
    std::vector<std::string> unreachable_members;

    std::uint64_t total_requests() const { return ask_requests + select_requests; }

    double elapsed_ms = 0.0;

    std::string to_json() const;
};

}  // namespace fedmesh
