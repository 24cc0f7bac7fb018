#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fedmesh/ast.hpp"
#include "fedmesh/binding.hpp"
#include "fedmesh/cache.hpp"
#include "fedmesh/concurrency.hpp"
#include "fedmesh/endpoint.hpp"
#include "fedmesh/errors.hpp"
#include "fedmesh/plan.hpp"

namespace fedmesh {

struct MediatorOptions {
    bool use_cache = true;
    bool form_groups = true;
    std::size_t parallelism = 16;  // bound-join requests in flight
    bool skip_unreachable = false; // treat unreachable members as irrelevant
};

struct MediateResult {
    SolutionSeq solutions;
    ExecutionTrace trace;
};

/// A query failed mid-flight; carries the accounting up to the failure so
/// callers never mistake a partial run for a complete one.
class MediateError : public Error {
public:
    MediateError(const std::string& msg, ExecutionTrace trace)
        : Error(msg), trace_(std::move(trace)) {}

    const ExecutionTrace& trace() const { return trace_; }

private:
    ExecutionTrace trace_;
};

/// Collects all patterns whose relevant set is the same singleton into one
/// ExclusiveGroup per endpoint (two patterns minimum; a lone single-source
/// pattern stays a leaf); everything else becomes a Pattern leaf. The group
/// sits at its first pattern's position; the pattern multiset is preserved.
/// sources_by_key maps normalize_pattern(p) to the relevant endpoint ids.
std::vector<PlanPtr> form_exclusive_groups(
    const std::vector<TriplePattern>& patterns,
    const std::map<std::string, std::vector<std::string>>& sources_by_key,
    bool grouping_enabled);

/// Greedy join order: repeatedly take the node with the fewest free
/// variables given everything already placed (an ExclusiveGroup scores by
/// its minimum per-pattern count); ties break by input position. The result
/// is a permutation of the input.
std::vector<PlanPtr> reorder_joins(std::vector<PlanPtr> nodes);

/// The federation mediator: ASK-based source selection with a cache,
/// exclusive-group formation, join reordering, and a bound-join executor
/// whose results match centralized evaluation over the merged member data.
class Mediator {
public:
    explicit Mediator(Federation& federation, MediatorOptions options = {});

    const MediatorOptions& options() const { return options_; }
    SelectionCache& cache() { return cache_; }

    /// Probes (or recalls) the relevant endpoints for each pattern. One ASK
    /// per unknown (distinct pattern, member) pair, fanned out concurrently;
    /// repeated patterns are answered once. Updates trace counts.
    SourceMap select_sources(const std::vector<TriplePattern>& patterns,
                             ExecutionTrace& trace);

    /// Source selection plus plan construction for the query's pattern tree.
    PlanPtr optimize(const Query& query, ExecutionTrace& trace);

    /// parse -> optimize -> execute -> modifiers. Throws MediateError when
    /// an endpoint fails mid-query (no partial results).
    MediateResult mediate(const std::string& query_text);
    MediateResult mediate(const Query& query);

private:
    struct Context;

    PlanPtr build_plan(const GraphPattern& pattern,
                       const std::map<std::string, std::vector<std::string>>& sources_by_key,
                       ExecutionTrace& trace) const;
    PlanPtr plan_bgp(const std::vector<TriplePattern>& patterns,
                     const std::vector<ExprPtr>& filters,
                     const std::map<std::string, std::vector<std::string>>& sources_by_key,
                     ExecutionTrace& trace) const;

    std::vector<BindingRow> exec(const PlanNode& node, std::vector<BindingRow> seeds,
                                 Context& ctx);

    Federation& federation_;
    MediatorOptions options_;
    SelectionCache cache_;
    ThreadPool pool_;
};

}  // namespace fedmesh
