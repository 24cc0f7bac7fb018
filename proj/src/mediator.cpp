#include "fedmesh/mediator.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <future>
#include <mutex>
#include <set>
#include <utility>

#include "fedmesh/eval.hpp"
#include "fedmesh/sparql_parser.hpp"
#include "fedmesh/sparql_text.hpp"

namespace fedmesh {

namespace {

std::vector<std::string> filter_vars(const std::vector<ExprPtr>& filters) {
    std::vector<std::string> out;
    for (const auto& f : filters) {
        for (const auto& v : f->variables()) {
            if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
        }
    }
    return out;
}

bool subset(const std::vector<std::string>& small, const std::vector<std::string>& big) {
    for (const auto& s : small) {
        if (std::find(big.begin(), big.end(), s) == big.end()) return false;
    }
    return true;
}

// Variables bound in every solution of the pattern, not just some. Union
// keeps the intersection of its arms; an optional's right side guarantees
// nothing. Seeding through a LeftJoin or Filter is only equivalent to
// bottom-up evaluation when the variables it inspects are certain: a seed
// value for a maybe-unbound variable would flip extension and filter
// verdicts.
std::vector<std::string> certain_vars(const GraphPattern& g) {
    switch (g.kind) {
        case GraphPattern::Kind::Bgp: {
            std::vector<std::string> out;
            for (const auto& p : g.patterns) {
                for (const auto& v : p.variables()) {
                    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
                }
            }
            return out;
        }
        case GraphPattern::Kind::Join: {
            std::vector<std::string> out;
            for (const auto& c : g.children) {
                for (const auto& v : certain_vars(*c)) {
                    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
                }
            }
            return out;
        }
        case GraphPattern::Kind::Union: {
            std::vector<std::string> left = certain_vars(*g.children[0]);
            std::vector<std::string> right = certain_vars(*g.children[1]);
            std::vector<std::string> out;
            for (const auto& v : left) {
                if (std::find(right.begin(), right.end(), v) != right.end()) out.push_back(v);
            }
            return out;
        }
        case GraphPattern::Kind::LeftJoin:
        case GraphPattern::Kind::Filter:
            return certain_vars(*g.children[0]);
    }
    return {};
}

// Bound-join instantiation: bound variables become terms, except blank
// nodes, which have no surface form in a query; those stay variables and
// the compatibility merge on returned rows enforces the equality instead.
TriplePattern substitute_for_dispatch(const TriplePattern& pattern, const BindingRow& row) {
    auto slot = [&row](const TermOrVar& tv) -> TermOrVar {
        if (is_var(tv)) {
            const Term* t = row.get(as_var(tv).name);
            if (t != nullptr && !t->is_blank()) return *t;
        }
        return tv;
    };
    return TriplePattern(slot(pattern.subject), slot(pattern.predicate),
                         slot(pattern.object));
}

std::vector<BindingRow> join_rows(const std::vector<BindingRow>& left,
                                  const std::vector<BindingRow>& right) {
    std::vector<BindingRow> out;
    for (const auto& l : left) {
        for (const auto& r : right) {
            if (rows_compatible(l, r)) out.push_back(merge_rows(l, r));
        }
    }
    return out;
}

std::vector<BindingRow> left_outer_rows(const std::vector<BindingRow>& left,
                                        const std::vector<BindingRow>& right) {
    std::vector<BindingRow> out;
    for (const auto& l : left) {
        bool extended = false;
        for (const auto& r : right) {
            if (rows_compatible(l, r)) {
                out.push_back(merge_rows(l, r));
                extended = true;
            }
        }
        if (!extended) out.push_back(l);
    }
    return out;
}

bool is_trivial_seed(const std::vector<BindingRow>& seeds) {
    return seeds.size() == 1 && seeds[0].empty();
}

std::size_t free_var_count(const TriplePattern& p, const std::set<std::string>& bound) {
    std::size_t n = 0;
    for (const auto& v : p.variables()) {
        if (bound.find(v) == bound.end()) ++n;
    }
    return n;
}

std::size_t node_score(const PlanNode& node, const std::set<std::string>& bound) {
    if (node.kind == PlanNode::Kind::ExclusiveGroup) {
        std::size_t best = SIZE_MAX;
        for (const auto& p : node.patterns) {
            best = std::min(best, free_var_count(p, bound));
        }
        return best;
    }
    if (node.kind == PlanNode::Kind::Pattern) return free_var_count(node.pattern, bound);
    std::size_t n = 0;
    for (const auto& v : node.variables()) {
        if (bound.find(v) == bound.end()) ++n;
    }
    return n;
}

const std::vector<BindingRow>& trivial_seed() {
    static const std::vector<BindingRow> seed{BindingRow{}};
    return seed;
}

}  // namespace

std::vector<PlanPtr> form_exclusive_groups(
    const std::vector<TriplePattern>& patterns,
    const std::map<std::string, std::vector<std::string>>& sources_by_key,
    bool grouping_enabled) {
    const std::size_t n = patterns.size();
    std::vector<std::string> single(n);  // empty = not single-source
    std::map<std::string, std::size_t> patterns_at;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& sources = sources_by_key.at(normalize_pattern(patterns[i]));
        if (sources.size() == 1) {
            single[i] = sources[0];
            ++patterns_at[sources[0]];
        }
    }

    std::vector<PlanPtr> out;
    std::set<std::string> emitted;
    for (std::size_t i = 0; i < n; ++i) {
        if (grouping_enabled && !single[i].empty() && patterns_at[single[i]] >= 2) {
            if (emitted.insert(single[i]).second) {
                std::vector<TriplePattern> members;
                for (std::size_t j = i; j < n; ++j) {
                    if (single[j] == single[i]) members.push_back(patterns[j]);
                }
                out.push_back(
                    PlanNode::exclusive_group(std::move(members), single[i], {}));
            }
            continue;
        }
        out.push_back(PlanNode::leaf(patterns[i],
                                     sources_by_key.at(normalize_pattern(patterns[i]))));
    }
    return out;
}

std::vector<PlanPtr> reorder_joins(std::vector<PlanPtr> nodes) {
    std::vector<PlanPtr> out;
    out.reserve(nodes.size());
    std::set<std::string> bound;
    std::vector<bool> used(nodes.size(), false);
    for (std::size_t round = 0; round < nodes.size(); ++round) {
        std::size_t best_index = nodes.size();
        std::size_t best_score = SIZE_MAX;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (used[i]) continue;
            const std::size_t score = node_score(*nodes[i], bound);
            if (score < best_score) {
                best_score = score;
                best_index = i;
            }
        }
        used[best_index] = true;
        for (const auto& v : nodes[best_index]->variables()) bound.insert(v);
        out.push_back(nodes[best_index]);
    }
    return out;
}

// Per-call execution state: the trace and its lock (leaf requests run on
// pool workers and Union arms on extra threads).
struct Mediator::Context {
    ExecutionTrace trace;
    std::mutex mu;

    SolutionSeq dispatch_select(Endpoint& endpoint, const std::string& text) {
        {
            std::lock_guard<std::mutex> lock(mu);
            ++trace.select_requests;
            ++trace.per_endpoint_select[endpoint.id()];
        }
        return endpoint.select(text);
    }
};

Mediator::Mediator(Federation& federation, MediatorOptions options)
    : federation_(federation), options_(options),
      pool_(options.parallelism ? options.parallelism : 1) {
    if (federation.empty()) throw ConfigError("federation must be non-empty");
}

SourceMap Mediator::select_sources(const std::vector<TriplePattern>& patterns,
                                   ExecutionTrace& trace) {
    struct KeyState {
        TriplePattern pattern;
        std::vector<std::string> relevant;
        std::size_t probed = 0;
        std::size_t cached = 0;
    };
    std::map<std::string, KeyState> by_key;
    std::vector<std::string> key_order;
    for (const auto& p : patterns) {
        std::string key = normalize_pattern(p);
        if (by_key.emplace(key, KeyState{p, {}, 0, 0}).second) {
            key_order.push_back(std::move(key));
        }
    }

    const auto& members = federation_.members();
    std::set<std::string> unreachable;
    for (const auto& key : key_order) {
        KeyState& state = by_key[key];
        // -1 probe needed, otherwise the cached verdict
        std::vector<int> verdict(members.size(), -1);
        if (options_.use_cache) {
            for (std::size_t m = 0; m < members.size(); ++m) {
                if (auto known = cache_.lookup(state.pattern, members[m]->id())) {
                    verdict[m] = *known ? 1 : 0;
                    ++state.cached;
                }
            }
        }
        trace.ask_saved += state.cached;

        // Fan the unknown probes out concurrently, one ASK per member.
        std::vector<std::pair<std::size_t, std::future<bool>>> probes;
        for (std::size_t m = 0; m < members.size(); ++m) {
            if (verdict[m] != -1) continue;
            Endpoint* endpoint = members[m].get();
            ++trace.ask_requests;
            ++trace.per_endpoint_ask[endpoint->id()];
            ++state.probed;
            const TriplePattern* pattern = &state.pattern;
            probes.emplace_back(m, std::async(std::launch::async, [endpoint, pattern] {
                                    return endpoint->ask(*pattern);
                                }));
        }

        std::exception_ptr failure;
        for (auto& [m, future] : probes) {
            try {
                const bool relevant = future.get();
                verdict[m] = relevant ? 1 : 0;
                if (options_.use_cache) {
                    cache_.update(state.pattern, members[m]->id(), relevant);
                }
            } catch (const EndpointUnreachableError&) {
                if (!options_.skip_unreachable) {
                    if (!failure) failure = std::current_exception();
                    continue;
                }
                verdict[m] = 0;
                unreachable.insert(members[m]->id());
            } catch (...) {
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);

        for (std::size_t m = 0; m < members.size(); ++m) {
            if (verdict[m] == 1) state.relevant.push_back(members[m]->id());
        }
    }

    trace.unreachable_members.assign(unreachable.begin(), unreachable.end());

    SourceMap map;
    map.reserve(patterns.size());
    for (const auto& p : patterns) {
        const KeyState& state = by_key[normalize_pattern(p)];
        map.push_back(SourceDecision{p, state.relevant, state.probed, state.cached});
    }
    return map;
}

PlanPtr Mediator::plan_bgp(
    const std::vector<TriplePattern>& patterns, const std::vector<ExprPtr>& filters,
    const std::map<std::string, std::vector<std::string>>& sources_by_key,
    ExecutionTrace& trace) const {
    for (const auto& p : patterns) {
        if (sources_by_key.at(normalize_pattern(p)).empty()) {
            trace.short_circuits.push_back(pattern_text(p));
            return PlanNode::empty(pattern_text(p));
        }
    }

    std::vector<PlanPtr> nodes =
        form_exclusive_groups(patterns, sources_by_key, options_.form_groups);
    nodes = reorder_joins(std::move(nodes));

    // A filter whose variables all live inside one exclusive group travels
    // to the endpoint inside that group's subquery.
    std::vector<ExprPtr> remaining;
    std::vector<std::vector<ExprPtr>> pushed(nodes.size());
    for (const auto& f : filters) {
        bool placed = false;
        for (std::size_t i = 0; i < nodes.size() && !placed; ++i) {
            if (nodes[i]->kind == PlanNode::Kind::ExclusiveGroup &&
                subset(f->variables(), nodes[i]->variables())) {
                pushed[i].push_back(f);
                placed = true;
            }
        }
        if (!placed) remaining.push_back(f);
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!pushed[i].empty()) {
            nodes[i] = PlanNode::exclusive_group(nodes[i]->patterns, nodes[i]->source,
                                                 std::move(pushed[i]));
        }
    }

    PlanPtr body = nodes.size() == 1 ? nodes[0] : PlanNode::join(std::move(nodes));
    if (remaining.empty()) return body;
    const bool safe = subset(filter_vars(remaining), body->variables());
    return PlanNode::filter(body, std::move(remaining), safe);
}

PlanPtr Mediator::build_plan(
    const GraphPattern& pattern,
    const std::map<std::string, std::vector<std::string>>& sources_by_key,
    ExecutionTrace& trace) const {
    using K = GraphPattern::Kind;
    switch (pattern.kind) {
        case K::Bgp:
            return plan_bgp(pattern.patterns, {}, sources_by_key, trace);
        case K::Filter: {
            const GraphPattern& child = *pattern.children[0];
            if (child.kind == K::Bgp) {
                return plan_bgp(child.patterns, pattern.filters, sources_by_key, trace);
            }
            const bool safe = subset(filter_vars(pattern.filters), certain_vars(child));
            return PlanNode::filter(build_plan(child, sources_by_key, trace),
                                    pattern.filters, safe);
        }
        case K::Join: {
            std::vector<PlanPtr> children;
            children.reserve(pattern.children.size());
            for (const auto& c : pattern.children) {
                children.push_back(build_plan(*c, sources_by_key, trace));
            }
            return PlanNode::join(std::move(children));
        }
        case K::Union:
            return PlanNode::union_(build_plan(*pattern.children[0], sources_by_key, trace),
                                    build_plan(*pattern.children[1], sources_by_key, trace));
        case K::LeftJoin: {
            const bool safe = subset(pattern.children[1]->variables(),
                                     certain_vars(*pattern.children[0]));
            return PlanNode::left_join(
                build_plan(*pattern.children[0], sources_by_key, trace),
                build_plan(*pattern.children[1], sources_by_key, trace), safe);
        }
    }
    throw Error("unhandled graph pattern kind");
}

PlanPtr Mediator::optimize(const Query& query, ExecutionTrace& trace) {
    const std::vector<TriplePattern> patterns = query.where->all_patterns();
    std::map<std::string, std::vector<std::string>> sources_by_key;
    if (!patterns.empty()) {
        SourceMap map = select_sources(patterns, trace);
        for (const auto& decision : map) {
            sources_by_key[normalize_pattern(decision.pattern)] = decision.relevant;
            trace.relevant_per_pattern.push_back(decision.relevant.size());
        }
    }
    return build_plan(*query.where, sources_by_key, trace);
}

std::vector<BindingRow> Mediator::exec(const PlanNode& node, std::vector<BindingRow> seeds,
                                       Context& ctx) {
    using Kind = PlanNode::Kind;
    switch (node.kind) {
        case Kind::Empty:
            return {};

        case Kind::Pattern: {
            if (seeds.empty()) return {};
            // One request per (input row, relevant endpoint), all through
            // the bounded pool.
            struct Task {
                std::size_t seed;
                std::future<SolutionSeq> result;
            };
            std::vector<Task> tasks;
            tasks.reserve(seeds.size() * node.sources.size());
            for (std::size_t s = 0; s < seeds.size(); ++s) {
                const TriplePattern sub = substitute_for_dispatch(node.pattern, seeds[s]);
                // A binding can land a literal in the predicate slot; no RDF
                // triple has one, so the row contributes nothing and the
                // request is not worth sending (nor expressible in SPARQL).
                if (!is_var(sub.predicate) && !as_term(sub.predicate).is_iri()) continue;
                const std::string text = select_subquery({sub});
                for (const auto& id : node.sources) {
                    Endpoint* endpoint = federation_.find(id);
                    tasks.push_back({s, pool_.submit([&ctx, endpoint, text] {
                                        return ctx.dispatch_select(*endpoint, text);
                                    })});
                }
            }

            // Per input row, the merged rows form a set: members may hold
            // overlapping data, and the centralized target is a set store.
            std::vector<std::set<BindingRow>> merged(seeds.size());
            std::exception_ptr failure;
            for (auto& task : tasks) {
                try {
                    SolutionSeq result = task.result.get();
                    for (const auto& row : result.rows) {
                        if (rows_compatible(seeds[task.seed], row)) {
                            merged[task.seed].insert(merge_rows(seeds[task.seed], row));
                        }
                    }
                } catch (...) {
                    if (!failure) failure = std::current_exception();
                }
            }
            if (failure) std::rethrow_exception(failure);

            std::vector<BindingRow> out;
            for (const auto& rows : merged) out.insert(out.end(), rows.begin(), rows.end());
            return out;
        }

        case Kind::ExclusiveGroup: {
            if (seeds.empty()) return {};
            const std::string text = select_subquery(node.patterns, node.filters);
            Endpoint* endpoint = federation_.find(node.source);
            SolutionSeq result =
                pool_.submit([&ctx, endpoint, text] {
                         return ctx.dispatch_select(*endpoint, text);
                     }).get();
            if (is_trivial_seed(seeds)) return std::move(result.rows);
            return join_rows(seeds, result.rows);
        }

        case Kind::Join: {
            std::vector<BindingRow> rows = std::move(seeds);
            for (const auto& child : node.children) {
                rows = exec(*child, std::move(rows), ctx);
            }
            return rows;
        }

        case Kind::Union: {
            auto right_arm = std::async(std::launch::async, [&] {
                return exec(*node.children[1], seeds, ctx);
            });
            std::vector<BindingRow> out = exec(*node.children[0], seeds, ctx);
            std::vector<BindingRow> right = right_arm.get();
            out.insert(out.end(), std::make_move_iterator(right.begin()),
                       std::make_move_iterator(right.end()));
            return out;
        }

        case Kind::LeftJoin: {
            const bool seeded = node.seed_safe || is_trivial_seed(seeds);
            auto right_arm = std::async(std::launch::async, [&] {
                return exec(*node.children[1], trivial_seed(), ctx);
            });
            std::vector<BindingRow> left =
                exec(*node.children[0], seeded ? std::move(seeds) : trivial_seed(), ctx);
            std::vector<BindingRow> rows = left_outer_rows(left, right_arm.get());
            if (seeded) return rows;
            return join_rows(seeds, rows);
        }

        case Kind::Filter: {
            const bool seeded = node.seed_safe || is_trivial_seed(seeds);
            std::vector<BindingRow> rows =
                exec(*node.children[0], seeded ? std::move(seeds) : trivial_seed(), ctx);
            rows.erase(std::remove_if(rows.begin(), rows.end(),
                                      [&node](const BindingRow& row) {
                                          return !filters_pass(node.filters, row);
                                      }),
                       rows.end());
            if (seeded) return rows;
            return join_rows(seeds, rows);
        }
    }
    throw Error("unhandled plan node kind");
}

MediateResult Mediator::mediate(const std::string& query_text) {
    return mediate(parse_query(query_text));
}

MediateResult Mediator::mediate(const Query& query) {
    Context ctx;
    const auto t0 = std::chrono::steady_clock::now();
    auto stamp = [&] {
        ctx.trace.elapsed_ms = std::chrono::duration<double, std::milli>(
                                   std::chrono::steady_clock::now() - t0)
                                   .count();
    };
    try {
        PlanPtr plan = optimize(query, ctx.trace);
        std::vector<BindingRow> rows = exec(*plan, trivial_seed(), ctx);
        SolutionSeq solutions = apply_modifiers(query, std::move(rows));
        stamp();
        return MediateResult{std::move(solutions), std::move(ctx.trace)};
    } catch (const std::exception& e) {
        stamp();
        throw MediateError(e.what(), std::move(ctx.trace));
    }
}

}  // namespace fedmesh
