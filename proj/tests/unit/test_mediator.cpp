#include <doctest.h>

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "fedmesh/eval.hpp"
#include "fedmesh/mediator.hpp"
#include "fedmesh/sparql_parser.hpp"
#include "fedmesh/sparql_text.hpp"
#include "support/rng.hpp"
#include "support/rows.hpp"

using namespace fedmesh;
using testsupport::Rng;

namespace {

const char* kP[] = {"http://ex/p0", "http://ex/p1", "http://ex/p2", "http://ex/p3"};

Term rnd_store_node(Rng& rng) {
    switch (rng.below(4)) {
        case 0: return Term::iri("http://ex/n" + std::to_string(rng.below(7)));
        case 1: return Term::blank("b" + std::to_string(rng.below(3)));
        case 2: return Term::literal(std::to_string(rng.below(6)), xsd::integer);
        default: return Term::literal("s" + std::to_string(rng.below(4)));
    }
}

// Query-side constants skip blank nodes: they have no surface form in a
// dispatched subquery.
Term rnd_query_node(Rng& rng) {
    switch (rng.below(3)) {
        case 0: return Term::iri("http://ex/n" + std::to_string(rng.below(7)));
        case 1: return Term::literal(std::to_string(rng.below(6)), xsd::integer);
        default: return Term::literal("s" + std::to_string(rng.below(4)));
    }
}

TriplePattern rnd_pattern(Rng& rng) {
    auto slot = [&rng](bool pred) -> TermOrVar {
        if (rng.chance(0.55)) return Variable{std::string(1, char('a' + rng.below(5)))};
        if (pred) return Term::iri(kP[rng.below(4)]);
        return rnd_query_node(rng);
    };
    TriplePattern p;
    p.subject = slot(false);
    if (!is_var(p.subject) && as_term(p.subject).is_literal()) p.subject = Variable{"s"};
    p.predicate = slot(true);
    p.object = slot(false);
    return p;
}

PatternPtr rnd_group(Rng& rng, int depth) {
    if (depth == 0 || rng.chance(0.45)) {
        std::vector<TriplePattern> pats;
        int n = rng.range(1, 3);
        for (int i = 0; i < n; ++i) pats.push_back(rnd_pattern(rng));
        return GraphPattern::bgp(std::move(pats));
    }
    switch (rng.below(4)) {
        case 0:
            return GraphPattern::join(rnd_group(rng, depth - 1), rnd_group(rng, depth - 1));
        case 1:
            return GraphPattern::union_(rnd_group(rng, depth - 1), rnd_group(rng, depth - 1));
        case 2:
            return GraphPattern::left_join(rnd_group(rng, depth - 1), rnd_group(rng, depth - 1));
        default: {
            ExprPtr f;
            switch (rng.below(3)) {
                case 0:
                    f = Expr::cmp(static_cast<Expr::CmpOp>(rng.below(6)),
                                  Expr::variable(std::string(1, char('a' + rng.below(5)))),
                                  Expr::constant(
                                      Term::literal(std::to_string(rng.below(6)), xsd::integer)));
                    break;
                case 1: f = Expr::bound(std::string(1, char('a' + rng.below(5)))); break;
                default:
                    f = Expr::logical_not(Expr::bound(std::string(1, char('a' + rng.below(5)))));
            }
            return GraphPattern::filter(rnd_group(rng, depth - 1), {f});
        }
    }
}

// Solution-modifier pipeline minus LIMIT/OFFSET: a cut depends on row order,
// which the mediator does not promise to reproduce.
Query rnd_query(Rng& rng, int depth) {
    Query q;
    q.form = rng.chance(0.15) ? QueryForm::Ask : QueryForm::Select;
    q.where = rnd_group(rng, depth);
    if (q.form == QueryForm::Select) {
        auto vars = q.where->variables();
        if (vars.empty() || rng.chance(0.3)) {
            q.select_all = true;
        } else {
            for (const auto& v : vars)
                if (rng.chance(0.6)) q.projection.push_back(v);
            if (q.projection.empty()) q.projection.push_back(vars[0]);
        }
        q.modifiers.distinct = rng.chance(0.4);
        if (!vars.empty() && rng.chance(0.2)) {
            CountSpec c;
            c.output_var = "n";
            if (rng.chance(0.5)) c.arg_var = vars[0];
            c.distinct = rng.chance(0.5);
            q.count = c;
            q.projection.clear();
            q.select_all = false;
            if (rng.chance(0.5)) q.modifiers.group_by.push_back(vars[vars.size() - 1]);
            q.modifiers.distinct = false;
        } else if (rng.chance(0.3)) {
            auto out = q.output_variables();
            if (!out.empty()) q.modifiers.order_by.push_back({out[0], rng.chance(0.5)});
        }
    }
    return q;
}

struct TestFederation {
    Federation federation;
    std::vector<Store> stores;  // mirrors the members, for oracles
    Store merged;
};

// Scatters a random triple pool across members: each triple lands on one
// member, or on two when overlap is allowed.
TestFederation random_federation(Rng& rng, std::size_t members, bool overlap, int pool) {
    std::vector<Store> stores(members);
    Store merged;
    for (int i = 0; i < pool; ++i) {
        Term subj = rnd_store_node(rng);
        while (subj.is_literal()) subj = rnd_store_node(rng);
        Triple t(subj, Term::iri(kP[rng.below(4)]), rnd_store_node(rng));
        std::size_t home = rng.below(members);
        stores[home].insert(t);
        if (overlap && rng.chance(0.3)) stores[(home + 1) % members].insert(t);
        merged.insert(t);
    }
    TestFederation out;
    out.stores = stores;
    out.merged = std::move(merged);
    for (std::size_t m = 0; m < members; ++m) {
        out.federation.add(
            std::make_shared<InProcessEndpoint>("m" + std::to_string(m), stores[m]));
    }
    return out;
}

std::uint64_t total_selects(const Federation& f) {
    std::uint64_t n = 0;
    for (const auto& m : f.members()) n += m->stats().select_requests;
    return n;
}

std::uint64_t total_asks(const Federation& f) {
    std::uint64_t n = 0;
    for (const auto& m : f.members()) n += m->stats().ask_requests;
    return n;
}

TriplePattern var_pattern(const std::string& s, const std::string& p, const std::string& o) {
    auto slot = [](const std::string& text) -> TermOrVar {
        if (!text.empty() && text[0] == '?') return Variable{text.substr(1)};
        return Term::iri("http://ex/" + text);
    };
    return TriplePattern(slot(s), slot(p), slot(o));
}

}  // namespace

TEST_CASE("normalize_pattern canonicalizes variable names") {
    // Alpha-equivalent patterns share a key.
    CHECK(normalize_pattern(var_pattern("?x", "p0", "?y")) ==
          normalize_pattern(var_pattern("?a", "p0", "?b")));
    // Repetition structure is part of the key.
    CHECK(normalize_pattern(var_pattern("?x", "p0", "?x")) !=
          normalize_pattern(var_pattern("?x", "p0", "?y")));
    CHECK(normalize_pattern(var_pattern("?x", "?x", "?y")) ==
          normalize_pattern(var_pattern("?q", "?q", "?r")));
    // Ground slots are part of the key.
    CHECK(normalize_pattern(var_pattern("?x", "p0", "?y")) !=
          normalize_pattern(var_pattern("?x", "p1", "?y")));
    // Literal details survive.
    TriplePattern lit1(Variable{"v"}, Term::iri("http://ex/p0"), Term::literal("5"));
    TriplePattern lit2(Variable{"v"}, Term::iri("http://ex/p0"),
                       Term::literal("5", xsd::integer));
    CHECK(normalize_pattern(lit1) != normalize_pattern(lit2));
    // Positional markers, not the original names.
    CHECK(normalize_pattern(var_pattern("?x", "p0", "?y")).find("?x") == std::string::npos);
}

TEST_CASE("selection cache stores tri-state verdicts per pattern and endpoint") {
    SelectionCache cache;
    TriplePattern p = var_pattern("?s", "p0", "?o");
    CHECK(!cache.lookup(p, "a").has_value());
    CHECK(cache.size() == 0);

    cache.update(p, "a", true);
    cache.update(p, "b", false);
    REQUIRE(cache.lookup(p, "a").has_value());
    CHECK(*cache.lookup(p, "a"));
    REQUIRE(cache.lookup(p, "b").has_value());
    CHECK(!*cache.lookup(p, "b"));
    CHECK(!cache.lookup(p, "c").has_value());
    CHECK(cache.size() == 2);

    // Alpha-equivalent lookups hit the same entry.
    CHECK(cache.lookup(var_pattern("?zz", "p0", "?ww"), "a").has_value());

    cache.update(p, "a", false);
    CHECK(!*cache.lookup(p, "a"));
    CHECK(cache.size() == 2);

    cache.flush();
    CHECK(cache.size() == 0);
    CHECK(!cache.lookup(p, "a").has_value());
}

TEST_CASE("form_exclusive_groups groups single-source runs") {
    TriplePattern p1 = var_pattern("?s", "p0", "?o");
    TriplePattern p2 = var_pattern("?s", "p1", "?o");
    TriplePattern p3 = var_pattern("?s", "p2", "?o");
    std::map<std::string, std::vector<std::string>> sources;

    SUBCASE("two patterns exclusive to one endpoint merge, the rest stay leaves") {
        sources[normalize_pattern(p1)] = {"a"};
        sources[normalize_pattern(p2)] = {"a"};
        sources[normalize_pattern(p3)] = {"a", "b"};
        auto nodes = form_exclusive_groups({p1, p2, p3}, sources, true);
        REQUIRE(nodes.size() == 2);
        CHECK(nodes[0]->kind == PlanNode::Kind::ExclusiveGroup);
        CHECK(nodes[0]->source == "a");
        CHECK(nodes[0]->patterns.size() == 2);
        CHECK(nodes[1]->kind == PlanNode::Kind::Pattern);
        CHECK(nodes[1]->sources == std::vector<std::string>{"a", "b"});
    }

    SUBCASE("a lone single-source pattern stays a leaf") {
        sources[normalize_pattern(p1)] = {"a"};
        sources[normalize_pattern(p2)] = {"a", "b"};
        auto nodes = form_exclusive_groups({p1, p2}, sources, true);
        REQUIRE(nodes.size() == 2);
        CHECK(nodes[0]->kind == PlanNode::Kind::Pattern);
        CHECK(nodes[1]->kind == PlanNode::Kind::Pattern);
    }

    SUBCASE("groups form per endpoint and sit at their first pattern's slot") {
        TriplePattern p4 = var_pattern("?s", "p3", "?o");
        sources[normalize_pattern(p1)] = {"a"};
        sources[normalize_pattern(p2)] = {"b"};
        sources[normalize_pattern(p3)] = {"a"};
        sources[normalize_pattern(p4)] = {"b"};
        auto nodes = form_exclusive_groups({p1, p2, p3, p4}, sources, true);
        REQUIRE(nodes.size() == 2);
        CHECK(nodes[0]->source == "a");
        CHECK(nodes[1]->source == "b");
        CHECK(pattern_text(nodes[0]->patterns[0]) == pattern_text(p1));
        CHECK(pattern_text(nodes[0]->patterns[1]) == pattern_text(p3));
    }

    SUBCASE("grouping disabled leaves every pattern a leaf") {
        sources[normalize_pattern(p1)] = {"a"};
        sources[normalize_pattern(p2)] = {"a"};
        auto nodes = form_exclusive_groups({p1, p2}, sources, false);
        REQUIRE(nodes.size() == 2);
        CHECK(nodes[0]->kind == PlanNode::Kind::Pattern);
        CHECK(nodes[1]->kind == PlanNode::Kind::Pattern);
    }

    SUBCASE("the pattern multiset is preserved") {
        Rng rng(4242);
        for (int round = 0; round < 60; ++round) {
            std::vector<TriplePattern> patterns;
            std::map<std::string, std::vector<std::string>> by_key;
            int n = rng.range(1, 7);
            for (int i = 0; i < n; ++i) {
                TriplePattern p = rnd_pattern(rng);
                std::vector<std::string> rel;
                for (int m = 0; m < 3; ++m)
                    if (rng.chance(0.5)) rel.push_back("m" + std::to_string(m));
                by_key[normalize_pattern(p)] = rel;  // repeated keys: last wins
                patterns.push_back(p);
            }
            auto nodes = form_exclusive_groups(patterns, by_key, rng.chance(0.7));
            std::multiset<std::string> want, got;
            for (const auto& p : patterns) want.insert(pattern_text(p));
            for (const auto& node : nodes) {
                for (const auto& p : node->all_patterns()) got.insert(pattern_text(p));
                if (node->kind == PlanNode::Kind::ExclusiveGroup) {
                    CHECK(node->patterns.size() >= 2);
                    for (const auto& p : node->patterns) {
                        CHECK(by_key[normalize_pattern(p)] ==
                              std::vector<std::string>{node->source});
                    }
                }
            }
            CHECK(want == got);
        }
    }
}

TEST_CASE("reorder_joins picks the fewest free variables first") {
    auto leaf = [](const TriplePattern& p) { return PlanNode::leaf(p, {"a"}); };

    SUBCASE("a ground-subject pattern runs before an open one") {
        auto open = leaf(var_pattern("?s", "p0", "?o"));
        auto anchored = leaf(var_pattern("n0", "p1", "?s"));
        auto nodes = reorder_joins({open, anchored});
        REQUIRE(nodes.size() == 2);
        CHECK(nodes[0] == anchored);
        CHECK(nodes[1] == open);
    }

    SUBCASE("variables bound by earlier nodes stop counting as free") {
        // chain: n0 -> ?a -> ?b -> ?c; the chain order is forced.
        auto first = leaf(var_pattern("n0", "p0", "?a"));
        auto second = leaf(var_pattern("?a", "p1", "?b"));
        auto third = leaf(var_pattern("?b", "p2", "?c"));
        auto nodes = reorder_joins({third, second, first});
        REQUIRE(nodes.size() == 3);
        CHECK(nodes[0] == first);
        CHECK(nodes[1] == second);
        CHECK(nodes[2] == third);
    }

    SUBCASE("ties break by input position") {
        auto one = leaf(var_pattern("?x", "p0", "n1"));
        auto two = leaf(var_pattern("?y", "p1", "n2"));
        auto nodes = reorder_joins({one, two});
        CHECK(nodes[0] == one);
        CHECK(nodes[1] == two);
    }

    SUBCASE("the output is a permutation with greedily minimal scores") {
        Rng rng(515);
        for (int round = 0; round < 80; ++round) {
            std::vector<PlanPtr> input;
            int n = rng.range(1, 6);
            for (int i = 0; i < n; ++i) input.push_back(leaf(rnd_pattern(rng)));
            auto output = reorder_joins(input);
            REQUIRE(output.size() == input.size());

            std::multiset<const PlanNode*> in_set, out_set;
            for (const auto& p : input) in_set.insert(p.get());
            for (const auto& p : output) out_set.insert(p.get());
            CHECK(in_set == out_set);

            // Greedy invariant: at each step the chosen node's free-variable
            // count is no larger than any remaining node's.
            std::set<std::string> bound;
            auto free_count = [&bound](const PlanNode& node) {
                std::size_t k = 0;
                for (const auto& v : node.variables())
                    if (!bound.count(v)) ++k;
                return k;
            };
            for (std::size_t i = 0; i < output.size(); ++i) {
                for (std::size_t j = i + 1; j < output.size(); ++j) {
                    CHECK(free_count(*output[i]) <= free_count(*output[j]));
                }
                for (const auto& v : output[i]->variables()) bound.insert(v);
            }
        }
    }
}

TEST_CASE("select_sources matches per-member brute force") {
    Rng rng(616);
    for (int round = 0; round < 120; ++round) {
        std::size_t members = rng.range(1, 6);
        TestFederation tf = random_federation(rng, members, rng.chance(0.5),
                                              rng.range(0, 50));
        Mediator mediator(tf.federation);

        std::vector<TriplePattern> patterns;
        int n = rng.range(1, 5);
        for (int i = 0; i < n; ++i) patterns.push_back(rnd_pattern(rng));

        ExecutionTrace trace;
        SourceMap map = mediator.select_sources(patterns, trace);
        REQUIRE(map.size() == patterns.size());
        for (std::size_t i = 0; i < patterns.size(); ++i) {
            std::vector<std::string> want;
            for (std::size_t m = 0; m < members; ++m) {
                if (tf.stores[m].ask(patterns[i])) want.push_back("m" + std::to_string(m));
            }
            CAPTURE(round);
            CAPTURE(pattern_text(patterns[i]));
            CHECK(map[i].relevant == want);
        }
    }
}

TEST_CASE("source selection probes every member once per distinct pattern") {
    Rng rng(717);
    TestFederation tf = random_federation(rng, 29, true, 300);

    auto q3 = parse_query(
        "SELECT * WHERE { ?s <http://ex/p0> ?o . ?o <http://ex/p1> ?t . "
        "?t <http://ex/p2> ?u }");
    // Seven patterns with pairwise-distinct normal forms: alpha-equivalent
    // repeats would collapse into one probe.
    auto q7 = parse_query(
        "SELECT * WHERE { ?a <http://ex/p0> ?b . ?b <http://ex/p1> ?c . "
        "?c <http://ex/p2> ?d . ?d <http://ex/p3> ?e . ?e <http://ex/q4> ?f . "
        "?f <http://ex/q5> ?g . ?g <http://ex/q6> ?h }");

    SUBCASE("3 patterns x 29 members cold, zero warm") {
        Mediator mediator(tf.federation);
        ExecutionTrace cold;
        mediator.optimize(q3, cold);
        CHECK(cold.ask_requests == 87);
        CHECK(cold.ask_saved == 0);
        CHECK(total_asks(tf.federation) == 87);

        ExecutionTrace warm;
        mediator.optimize(q3, warm);
        CHECK(warm.ask_requests == 0);
        CHECK(warm.ask_saved == 87);
        CHECK(total_asks(tf.federation) == 87);
        tf.federation.reset_counters();
    }

    SUBCASE("7 patterns x 29 members cold") {
        Mediator mediator(tf.federation);
        ExecutionTrace cold;
        mediator.optimize(q7, cold);
        CHECK(cold.ask_requests == 203);
        ExecutionTrace warm;
        mediator.optimize(q7, warm);
        CHECK(warm.ask_requests == 0);
        CHECK(warm.ask_saved == 203);
        tf.federation.reset_counters();
    }

    SUBCASE("repeated patterns are probed once") {
        Mediator mediator(tf.federation);
        ExecutionTrace trace;
        std::vector<TriplePattern> twice = {var_pattern("?s", "p0", "?o"),
                                            var_pattern("?x", "p0", "?y")};
        SourceMap map = mediator.select_sources(twice, trace);
        CHECK(trace.ask_requests == 29);
        CHECK(map[0].relevant == map[1].relevant);
        CHECK(map[0].probed == 29);
        CHECK(map[1].probed == 29);  // the shared probe result, reported per pattern
        tf.federation.reset_counters();
    }

    SUBCASE("disabling the cache keeps probes repeating") {
        Mediator mediator(tf.federation, {.use_cache = false});
        ExecutionTrace first, second;
        mediator.optimize(q3, first);
        mediator.optimize(q3, second);
        CHECK(first.ask_requests == 87);
        CHECK(second.ask_requests == 87);
        CHECK(second.ask_saved == 0);
        CHECK(mediator.cache().size() == 0);
        tf.federation.reset_counters();
    }
}

TEST_CASE("mediation is transparent: federated rows equal centralized rows") {
    Rng rng(818);
    int nonempty = 0;
    for (int round = 0; round < 90; ++round) {
        std::size_t members = rng.range(2, 5);
        bool overlap = rng.chance(0.5);
        TestFederation tf = random_federation(rng, members, overlap, rng.range(5, 70));
        MediatorOptions options;
        options.use_cache = rng.chance(0.7);
        options.form_groups = rng.chance(0.7);
        options.parallelism = rng.range(1, 8);
        Mediator mediator(tf.federation, options);

        Query q = rnd_query(rng, 2);
        CAPTURE(round);

        auto before = tf.federation.snapshot_counters();
        MediateResult got = mediator.mediate(q);
        SolutionSeq want = evaluate(tf.merged, q);

        if (q.form == QueryForm::Ask) {
            REQUIRE(got.solutions.is_ask());
            CHECK(got.solutions.boolean == want.boolean);
        } else {
            CHECK(got.solutions.vars == want.vars);
            REQUIRE(testsupport::same_rows_unordered(got.solutions.rows, want.rows));
            if (!want.rows.empty()) ++nonempty;
        }

        // The trace agrees with the members' own counters.
        std::uint64_t ask_delta = 0, select_delta = 0;
        auto after = tf.federation.snapshot_counters();
        for (const auto& [id, stats] : after) {
            RequestStats d = stats.since(before.at(id));
            ask_delta += d.ask_requests;
            select_delta += d.select_requests;
            CHECK(got.trace.per_endpoint_ask[id] == d.ask_requests);
            CHECK(got.trace.per_endpoint_select[id] == d.select_requests);
        }
        CHECK(got.trace.ask_requests == ask_delta);
        CHECK(got.trace.select_requests == select_delta);
        CHECK(got.trace.total_requests() == ask_delta + select_delta);
    }
    CHECK(nonempty > 20);  // the generator keeps exercising real joins
}

TEST_CASE("pattern order never changes results") {
    Rng rng(919);
    for (int round = 0; round < 40; ++round) {
        TestFederation tf = random_federation(rng, 3, true, rng.range(10, 60));
        std::vector<TriplePattern> pats;
        int n = rng.range(2, 4);
        for (int i = 0; i < n; ++i) pats.push_back(rnd_pattern(rng));

        Query q;
        q.select_all = true;
        q.where = GraphPattern::bgp(pats);
        std::reverse(pats.begin(), pats.end());
        Query reversed;
        reversed.select_all = true;
        reversed.where = GraphPattern::bgp(pats);

        Mediator mediator(tf.federation);
        auto a = mediator.mediate(q);
        auto b = mediator.mediate(reversed);
        CAPTURE(round);
        REQUIRE(testsupport::same_rows_unordered(a.solutions.rows, b.solutions.rows));
    }
}

TEST_CASE("caching changes request counts, never results") {
    Rng rng(1020);
    for (int round = 0; round < 30; ++round) {
        TestFederation tf = random_federation(rng, 4, rng.chance(0.5), rng.range(10, 60));
        Query q = rnd_query(rng, 2);

        Mediator cached(tf.federation, {.use_cache = true});
        Mediator uncached(tf.federation, {.use_cache = false});

        auto c1 = cached.mediate(q);
        auto c2 = cached.mediate(q);
        auto u1 = uncached.mediate(q);

        CAPTURE(round);
        if (q.form == QueryForm::Ask) {
            CHECK(c1.solutions.boolean == u1.solutions.boolean);
            CHECK(c2.solutions.boolean == u1.solutions.boolean);
        } else {
            REQUIRE(testsupport::same_rows_unordered(c1.solutions.rows, u1.solutions.rows));
            REQUIRE(testsupport::same_rows_unordered(c2.solutions.rows, c1.solutions.rows));
        }
        CHECK(c2.trace.ask_requests == 0);
        CHECK(c2.trace.ask_saved == c1.trace.ask_requests);
        CHECK(u1.trace.ask_saved == 0);
        CHECK(c2.trace.select_requests == c1.trace.select_requests);
    }
}

TEST_CASE("exclusive groups reduce requests without changing results") {
    Rng rng(1121);
    int grouped_queries = 0;
    for (int round = 0; round < 30; ++round) {
        // Three members with disjoint predicate families force exclusivity.
        std::vector<Store> stores(3);
        Store merged;
        for (int i = 0; i < 40; ++i) {
            int member = rng.below(3);
            Term s = Term::iri("http://ex/n" + std::to_string(rng.below(8)));
            // p0/p1 live only on member 0, p2 on member 1, p3 on member 2.
            const char* pred = member == 0 ? (rng.chance(0.5) ? kP[0] : kP[1])
                                           : (member == 1 ? kP[2] : kP[3]);
            Triple t(s, Term::iri(pred), rnd_store_node(rng));
            stores[member].insert(t);
            merged.insert(t);
        }
        Federation grouped_fed, plain_fed;
        for (int m = 0; m < 3; ++m) {
            grouped_fed.add(std::make_shared<InProcessEndpoint>("m" + std::to_string(m),
                                                                stores[m]));
            plain_fed.add(std::make_shared<InProcessEndpoint>("m" + std::to_string(m),
                                                              stores[m]));
        }

        auto q = parse_query(
            "SELECT * WHERE { ?s <http://ex/p0> ?a . ?s <http://ex/p1> ?b . "
            "?s <http://ex/p2> ?c }");

        Mediator grouped(grouped_fed, {.form_groups = true});
        Mediator plain(plain_fed, {.form_groups = false});
        auto g = grouped.mediate(q);
        auto p = plain.mediate(q);

        CAPTURE(round);
        REQUIRE(testsupport::same_rows_unordered(g.solutions.rows, p.solutions.rows));
        REQUIRE(testsupport::same_rows_unordered(g.solutions.rows,
                                                 evaluate(merged, q).rows));
        CHECK(g.trace.select_requests <= p.trace.select_requests);
        if (!stores[0].empty()) {
            ++grouped_queries;
            // Both p0 and p1 are exclusive to member 0: one subquery covers
            // them regardless of how many rows stage one yields.
            CHECK(g.trace.per_endpoint_select["m0"] == 1);
        }
    }
    CHECK(grouped_queries > 0);
}

TEST_CASE("an all-exclusive query travels as a single request") {
    Store a, b;
    for (int i = 0; i < 5; ++i) {
        Term s = Term::iri("http://ex/n" + std::to_string(i));
        a.insert(Triple(s, Term::iri(kP[0]), Term::literal(std::to_string(i), xsd::integer)));
        a.insert(Triple(s, Term::iri(kP[1]), Term::literal("s" + std::to_string(i))));
        b.insert(Triple(s, Term::iri(kP[2]), s));
    }
    Federation fed;
    fed.add(std::make_shared<InProcessEndpoint>("a", a));
    fed.add(std::make_shared<InProcessEndpoint>("b", b));

    auto q = parse_query(
        "SELECT * WHERE { ?s <http://ex/p0> ?v . ?s <http://ex/p1> ?w }");
    Mediator mediator(fed);
    auto result = mediator.mediate(q);

    CHECK(result.trace.select_requests == 1);
    CHECK(result.trace.per_endpoint_select["a"] == 1);
    Store merged = fed.merged_store();
    REQUIRE(testsupport::same_rows_unordered(result.solutions.rows,
                                             evaluate(merged, q).rows));
    CHECK(result.solutions.rows.size() == 5);
}

TEST_CASE("a pattern with no relevant member short-circuits its group") {
    Store a;
    a.insert(Triple(Term::iri("http://ex/n0"), Term::iri(kP[0]),
                    Term::literal("1", xsd::integer)));
    Federation fed;
    fed.add(std::make_shared<InProcessEndpoint>("a", a));
    fed.add(std::make_shared<InProcessEndpoint>("b", Store{}));
    Mediator mediator(fed);

    SUBCASE("the whole query collapses without select requests") {
        auto r = mediator.mediate(
            parse_query("SELECT * WHERE { ?s <http://ex/p0> ?o . ?s <http://ex/p3> ?x }"));
        CHECK(r.solutions.rows.empty());
        CHECK(r.trace.select_requests == 0);
        REQUIRE(r.trace.short_circuits.size() == 1);
        CHECK(r.trace.short_circuits[0].find("http://ex/p3") != std::string::npos);
        CHECK(r.trace.ask_requests == 4);  // selection still probed both patterns
    }

    SUBCASE("a union's live arm still answers") {
        auto r = mediator.mediate(parse_query(
            "SELECT * WHERE { { ?s <http://ex/p3> ?o } UNION { ?s <http://ex/p0> ?o } }"));
        CHECK(r.solutions.rows.size() == 1);
        CHECK(r.trace.short_circuits.size() == 1);
        CHECK(r.trace.select_requests == 1);
    }
}

TEST_CASE("bound joins send one request per input row and endpoint") {
    // Stage one runs on member s1 and a filter keeps exactly k of its rows;
    // stage two fans each surviving row out to m members: k*m requests.
    for (std::uint64_t k : {0ull, 1ull, 5ull, 50ull}) {
        for (std::size_t m : {std::size_t{1}, std::size_t{3}}) {
            Store stage1;
            for (int i = 1; i <= 60; ++i) {
                Term item = Term::iri("http://ex/item" + std::to_string(i));
                stage1.insert(Triple(Term::iri("http://ex/root"), Term::iri(kP[0]), item));
                stage1.insert(
                    Triple(item, Term::iri(kP[2]),
                           Term::literal(std::to_string(i), xsd::integer)));
            }
            Federation fed;
            fed.add(std::make_shared<InProcessEndpoint>("s1", stage1));
            for (std::size_t j = 0; j < m; ++j) {
                Store s;
                for (int i = 1; i <= 60; ++i) {
                    s.insert(Triple(Term::iri("http://ex/item" + std::to_string(i)),
                                    Term::iri(kP[1]),
                                    Term::literal(std::to_string(i), xsd::integer)));
                }
                fed.add(std::make_shared<InProcessEndpoint>("t" + std::to_string(j), s));
            }

            std::string query =
                "SELECT * WHERE { { <http://ex/root> <http://ex/p0> ?x . "
                "?x <http://ex/p2> ?idx . FILTER(?idx <= " +
                std::to_string(k) + ") } { ?x <http://ex/p1> ?y } }";

            Mediator mediator(fed, {.form_groups = false, .parallelism = 4});
            auto r = mediator.mediate(parse_query(query));

            CAPTURE(k);
            CAPTURE(m);
            // Stage one costs 1 request (trivial seed) plus 60 bound probes
            // for the index pattern, all on s1.
            CHECK(r.trace.per_endpoint_select["s1"] == 1 + 60);
            std::uint64_t fan = 0;
            for (std::size_t j = 0; j < m; ++j) {
                fan += r.trace.per_endpoint_select["t" + std::to_string(j)];
            }
            CHECK(fan == k * m);
            CHECK(r.solutions.rows.size() == k);
        }
    }
}

TEST_CASE("pruned members cost nothing at query time") {
    Rng rng(1323);
    for (int round = 0; round < 20; ++round) {
        TestFederation tf = random_federation(rng, 3, rng.chance(0.5), rng.range(10, 40));

        // A fourth member whose data shares no predicate with the query.
        Store off_topic;
        for (int i = 0; i < 10; ++i) {
            off_topic.insert(Triple(Term::iri("http://ex/other" + std::to_string(i)),
                                    Term::iri("http://ex/unrelated"),
                                    Term::literal(std::to_string(i), xsd::integer)));
        }
        Federation grown;
        for (std::size_t i = 0; i < 3; ++i) {
            grown.add(std::make_shared<InProcessEndpoint>("m" + std::to_string(i),
                                                          tf.stores[i]));
        }
        grown.add(std::make_shared<InProcessEndpoint>("extra", off_topic));

        Query q;
        q.select_all = true;
        std::vector<TriplePattern> pats;
        int n = rng.range(1, 3);
        for (int i = 0; i < n; ++i) {
            // Ground predicates only: a variable predicate would make the
            // extra member genuinely relevant.
            TriplePattern p = rnd_pattern(rng);
            p.predicate = Term::iri(kP[rng.below(4)]);
            pats.push_back(p);
        }
        q.where = GraphPattern::bgp(pats);

        Mediator small(tf.federation), big(grown);
        auto a = small.mediate(q);
        auto b = big.mediate(q);

        std::set<std::string> distinct_keys;
        for (const auto& p : pats) distinct_keys.insert(normalize_pattern(p));

        CAPTURE(round);
        REQUIRE(testsupport::same_rows_unordered(a.solutions.rows, b.solutions.rows));
        CHECK(b.trace.select_requests == a.trace.select_requests);
        CHECK(b.trace.per_endpoint_select["extra"] == 0);
        // Selection still probes the extra member once per distinct pattern.
        CHECK(b.trace.per_endpoint_ask["extra"] == distinct_keys.size());
    }
}

TEST_CASE("mediator construction rejects an empty federation") {
    Federation fed;
    CHECK_THROWS_AS(Mediator{fed}, ConfigError);
}

TEST_CASE("parse errors surface directly, not as mediation failures") {
    Store a;
    Federation fed;
    fed.add(std::make_shared<InProcessEndpoint>("a", a));
    Mediator mediator(fed);
    CHECK_THROWS_AS(mediator.mediate("SELECT WHERE"), QueryParseError);
    CHECK_THROWS_AS(mediator.mediate("SELECT * WHERE { ?s <p>+ ?o }"),
                    UnsupportedFeatureError);
}

TEST_CASE("unreachable members: skip policy versus hard failure") {
    Store live_data;
    live_data.insert(Triple(Term::iri("http://ex/n0"), Term::iri(kP[0]),
                            Term::literal("1", xsd::integer)));
    auto make_fed = [&] {
        Federation fed;
        fed.add(std::make_shared<InProcessEndpoint>("live", live_data));
        // Nothing listens on this port: connection refused, not a timeout.
        fed.add(std::make_shared<RemoteEndpoint>("dead", "http://127.0.0.1:1/sparql",
                                                 LatencySpec{}, 0, 2));
        return fed;
    };

    SUBCASE("skip_unreachable treats the member as irrelevant") {
        Federation fed = make_fed();
        Mediator mediator(fed, {.skip_unreachable = true});
        auto r = mediator.mediate("SELECT * WHERE { ?s <http://ex/p0> ?o }");
        CHECK(r.solutions.rows.size() == 1);
        REQUIRE(r.trace.unreachable_members.size() == 1);
        CHECK(r.trace.unreachable_members[0] == "dead");
        CHECK(r.trace.per_endpoint_select["dead"] == 0);
    }

    SUBCASE("the default propagates the failure with a partial trace") {
        Federation fed = make_fed();
        Mediator mediator(fed);
        try {
            mediator.mediate("SELECT * WHERE { ?s <http://ex/p0> ?o }");
            FAIL("expected MediateError");
        } catch (const MediateError& e) {
            CHECK(std::string(e.what()).find("dead") != std::string::npos);
            CHECK(e.trace().ask_requests == 2);  // both probes were attempted
            CHECK(e.trace().select_requests == 0);
        }
    }
}

TEST_CASE("execution traces serialize to json") {
    Store a;
    a.insert(Triple(Term::iri("http://ex/n0"), Term::iri(kP[0]),
                    Term::literal("1", xsd::integer)));
    Federation fed;
    fed.add(std::make_shared<InProcessEndpoint>("a", a));
    Mediator mediator(fed);
    auto r = mediator.mediate("SELECT * WHERE { ?s <http://ex/p0> ?o }");
    std::string json = r.trace.to_json();
    CHECK(json.find("\"ask_requests\"") != std::string::npos);
    CHECK(json.find("\"select_requests\"") != std::string::npos);
    CHECK(json.find("\"a\"") != std::string::npos);
    CHECK(r.trace.elapsed_ms >= 0.0);
}
