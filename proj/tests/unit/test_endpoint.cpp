#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <vector>

#include "fedmesh/concurrency.hpp"
#include "fedmesh/endpoint.hpp"
#include "fedmesh/errors.hpp"
#include "fedmesh/eval.hpp"
#include "fedmesh/ntriples.hpp"
#include "fedmesh/rng.hpp"
#include "fedmesh/sparql_parser.hpp"
#include "fedmesh/sparql_text.hpp"
#include "support/rng.hpp"
#include "support/rows.hpp"

using namespace fedmesh;

namespace {

Term iri(const std::string& s) { return Term::iri("http://t/" + s); }

Store tiny_store() {
    Store s;
    s.insert(Triple(iri("a"), iri("p"), iri("b")));
    s.insert(Triple(iri("b"), iri("p"), iri("c")));
    s.insert(Triple(iri("a"), iri("q"), Term::literal("x")));
    return s;
}

Store random_store(testsupport::Rng& rng, std::size_t triples) {
    Store s;
    for (std::size_t i = 0; i < triples; ++i) {
        Term subj = iri("s" + std::to_string(rng.below(8)));
        Term pred = iri("p" + std::to_string(rng.below(4)));
        Term obj = rng.chance(0.33) ? Term::literal(std::to_string(rng.below(6)))
                                 : iri("o" + std::to_string(rng.below(8)));
        s.insert(Triple(subj, pred, obj));
    }
    return s;
}

TriplePattern random_pattern(testsupport::Rng& rng) {
    auto slot = [&](int kind) -> TermOrVar {
        if (rng.chance(0.5)) return Variable{"v" + std::to_string(rng.below(3))};
        switch (kind) {
            case 0: return iri("s" + std::to_string(rng.below(8)));
            case 1: return iri("p" + std::to_string(rng.below(4)));
            default:
                return rng.chance(0.33) ? TermOrVar(Term::literal(std::to_string(rng.below(6))))
                                     : TermOrVar(iri("o" + std::to_string(rng.below(8))));
        }
    };
    return TriplePattern(slot(0), slot(1), slot(2));
}

}  // namespace

TEST_CASE("fresh endpoint has all-zero counters") {
    InProcessEndpoint ep("e1", tiny_store());
    RequestStats s = ep.stats();
    CHECK(s.select_requests == 0);
    CHECK(s.ask_requests == 0);
    CHECK(s.bytes_received == 0);
    CHECK(s.cumulative_wait_ms == 0.0);
}

TEST_CASE("select and ask each increment exactly their counter") {
    InProcessEndpoint ep("e1", tiny_store());
    ep.select("SELECT * WHERE { ?s ?p ?o }");
    CHECK(ep.stats().select_requests == 1);
    CHECK(ep.stats().ask_requests == 0);
    ep.select("SELECT * WHERE { ?s ?p ?o }");
    CHECK(ep.stats().select_requests == 2);
    ep.ask(TriplePattern());
    CHECK(ep.stats().select_requests == 2);
    CHECK(ep.stats().ask_requests == 1);

    ep.reset_stats();
    CHECK(ep.stats().total_requests() == 0);
}

TEST_CASE("in-process select equals direct evaluation") {
    Store store = tiny_store();
    InProcessEndpoint ep("e1", tiny_store());
    const char* queries[] = {
        "SELECT * WHERE { ?s <http://t/p> ?o }",
        "SELECT DISTINCT ?s WHERE { ?s ?p ?o }",
        "SELECT * WHERE { ?s <http://t/p> ?o . OPTIONAL { ?o <http://t/p> ?o2 } }",
        "SELECT * WHERE { { ?s <http://t/p> ?o } UNION { ?s <http://t/q> ?o } }",
    };
    for (const char* q : queries) {
        SolutionSeq via_endpoint = ep.select(q);
        SolutionSeq direct = evaluate(store, parse_query(q));
        CHECK(via_endpoint.vars == direct.vars);
        CHECK(testsupport::same_rows_unordered(via_endpoint.rows, direct.rows));
    }
}

TEST_CASE("ask agrees with the store ask oracle") {
    InProcessEndpoint empty("e0", Store{});
    CHECK_FALSE(empty.ask(TriplePattern()));

    InProcessEndpoint ep("e1", tiny_store());
    CHECK(ep.ask(TriplePattern()));

    testsupport::Rng rng(0xa5c3);
    for (int round = 0; round < 40; ++round) {
        Store store = random_store(rng, 30);
        InProcessEndpoint member("m", Store(store));
        for (int i = 0; i < 25; ++i) {
            TriplePattern p = random_pattern(rng);
            CHECK(member.ask(p) == store.ask(p));
        }
    }
}

TEST_CASE("zero latency injects nothing") {
    InProcessEndpoint ep("e1", tiny_store());
    for (int i = 0; i < 10; ++i) ep.ask(TriplePattern());
    CHECK(ep.stats().cumulative_wait_ms == 0.0);
}

TEST_CASE("fixed latency is additive across sequential requests") {
    InProcessEndpoint ep("e1", tiny_store(), LatencySpec{20.0, 0.0});
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 5; ++i) ep.ask(TriplePattern());
    auto elapsed = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    CHECK(elapsed >= 100.0);
    CHECK(ep.stats().cumulative_wait_ms >= 100.0 - 1e-9);
    CHECK(ep.stats().cumulative_wait_ms <= 100.0 + 1e-3);
}

TEST_CASE("jitter stays inside its bounds and centers") {
    InProcessEndpoint ep("e1", tiny_store(), LatencySpec{1.0, 1.0}, 99);
    const int n = 200;
    double last = 0.0;
    for (int i = 0; i < n; ++i) {
        ep.ask(TriplePattern());
        double now = ep.stats().cumulative_wait_ms;
        double delta = now - last;
        CHECK(delta >= 1.0 - 1e-6);
        CHECK(delta <= 2.0 + 1e-6);
        last = now;
    }
    double mean = last / n;
    // Sample mean of uniform [1,2]; the band is ~15 sigma wide.
    CHECK(mean > 1.2);
    CHECK(mean < 1.8);
}

TEST_CASE("latency changes timing only, never results") {
    InProcessEndpoint fast("f", tiny_store());
    InProcessEndpoint slow("s", tiny_store(), LatencySpec{5.0, 2.0}, 7);
    const std::string q = "SELECT * WHERE { ?s ?p ?o }";
    CHECK(testsupport::same_rows_unordered(fast.select(q).rows, slow.select(q).rows));
    CHECK(fast.stats().select_requests == slow.stats().select_requests);
    CHECK(slow.stats().cumulative_wait_ms >= 5.0);
}

TEST_CASE("latency reconfiguration validates and applies") {
    InProcessEndpoint ep("e1", tiny_store());
    CHECK_THROWS_AS(ep.set_latency(LatencySpec{-1.0, 0.0}), ConfigError);
    ep.set_latency(LatencySpec{3.0, 0.0});
    ep.ask(TriplePattern());
    CHECK(ep.stats().cumulative_wait_ms >= 3.0 - 1e-9);
}

TEST_CASE("concurrent requests keep exact counts") {
    InProcessEndpoint ep("e1", tiny_store());
    ThreadPool pool(8);
    std::vector<std::future<void>> futures;
    for (int i = 0; i < 64; ++i) {
        futures.push_back(pool.submit([&ep] {
            ep.select("SELECT * WHERE { ?s ?p ?o }");
            ep.ask(TriplePattern());
        }));
    }
    for (auto& f : futures) f.get();
    CHECK(ep.stats().select_requests == 64);
    CHECK(ep.stats().ask_requests == 64);
}

TEST_CASE("federation enforces distinct ids") {
    Federation fed;
    fed.add(std::make_shared<InProcessEndpoint>("a", Store{}));
    CHECK_THROWS_AS(fed.add(std::make_shared<InProcessEndpoint>("a", Store{})), ConfigError);
    fed.add(std::make_shared<InProcessEndpoint>("b", Store{}));
    CHECK(fed.size() == 2);
    CHECK(fed.find("a") != nullptr);
    CHECK(fed.find("c") == nullptr);
}

TEST_CASE("counter snapshots are point-in-time and per-member") {
    Federation fed;
    fed.add(std::make_shared<InProcessEndpoint>("a", tiny_store()));
    fed.add(std::make_shared<InProcessEndpoint>("b", tiny_store()));
    for (const auto& [id, st] : fed.snapshot_counters()) CHECK(st.total_requests() == 0);

    fed.find("b")->ask(TriplePattern());
    auto snap = fed.snapshot_counters();
    CHECK(snap["a"].ask_requests == 0);
    CHECK(snap["b"].ask_requests == 1);

    fed.find("b")->ask(TriplePattern());
    CHECK(snap["b"].ask_requests == 1);

    fed.reset_counters();
    CHECK(fed.snapshot_counters()["b"].ask_requests == 0);
}

TEST_CASE("stats delta arithmetic") {
    InProcessEndpoint ep("e1", tiny_store());
    ep.ask(TriplePattern());
    RequestStats before = ep.stats();
    ep.ask(TriplePattern());
    ep.select("SELECT * WHERE { ?s ?p ?o }");
    RequestStats delta = ep.stats().since(before);
    CHECK(delta.ask_requests == 1);
    CHECK(delta.select_requests == 1);
}

TEST_CASE("merged store equals set union of member data") {
    testsupport::Rng rng(0xfeed);
    for (int round = 0; round < 20; ++round) {
        Federation fed;
        std::vector<Triple> all;
        for (int m = 0; m < 4; ++m) {
            Store s = random_store(rng, 25);
            for (const auto& t : s.triples()) all.push_back(t);
            fed.add(std::make_shared<InProcessEndpoint>("m" + std::to_string(m),
                                                        std::move(s)));
        }
        Store expected;
        for (const auto& t : all) expected.insert(t);
        Store merged = fed.merged_store();
        CHECK(merged.size() == expected.size());
        for (const auto& t : expected.triples()) CHECK(merged.contains(t));
    }
}

TEST_CASE("merged store refuses remote members") {
    Federation fed;
    fed.add(std::make_shared<InProcessEndpoint>("a", Store{}));
    fed.add(std::make_shared<RemoteEndpoint>("r", "http://127.0.0.1:1/x"));
    CHECK_THROWS_AS(fed.merged_store(), Error);
}

TEST_CASE("federation config loads members from files") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "fedmesh_fed_cfg";
    fs::create_directories(dir);
    {
        std::ofstream a(dir / "a.nt");
        a << "<http://t/a> <http://t/p> <http://t/b> .\n";
        std::ofstream b(dir / "b.nt");
        b << "<http://t/b> <http://t/p> <http://t/c> .\n"
          << "<http://t/b> <http://t/q> \"x\" .\n";
    }
    const std::string cfg = R"({
        "seed": 11,
        "members": [
            {"id": "a", "data": ["a.nt"]},
            {"id": "b", "data": ["b.nt"], "latency_ms": 1.5, "jitter_ms": 0.5}
        ]
    })";
    Federation fed = Federation::from_config_json(cfg, dir);
    REQUIRE(fed.size() == 2);
    auto* a = dynamic_cast<InProcessEndpoint*>(fed.find("a"));
    auto* b = dynamic_cast<InProcessEndpoint*>(fed.find("b"));
    REQUIRE(a != nullptr);
    REQUIRE(b != nullptr);
    CHECK(a->store().size() == 1);
    CHECK(b->store().size() == 2);
    CHECK(b->latency().fixed_ms == 1.5);
    CHECK(b->latency().jitter_ms == 0.5);
    CHECK(fed.merged_store().size() == 3);

    std::ofstream(dir / "fed.json") << cfg;
    Federation from_file = Federation::from_config_file(dir / "fed.json");
    CHECK(from_file.size() == 2);

    fs::remove_all(dir);
}

TEST_CASE("federation config rejects malformed input") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path();
    auto load = [&](const std::string& text) {
        return Federation::from_config_json(text, dir);
    };
    CHECK_THROWS_AS(load("not json"), ConfigError);
    CHECK_THROWS_AS(load(R"({})"), ConfigError);
    CHECK_THROWS_AS(load(R"({"members": []})"), ConfigError);
    CHECK_THROWS_AS(load(R"({"members": [{"data": ["x.nt"]}]})"), ConfigError);
    CHECK_THROWS_AS(load(R"({"members": [{"id": "a"}]})"), ConfigError);
    CHECK_THROWS_AS(
        load(R"({"members": [{"id": "a", "url": "http://x/", "data": ["x.nt"]}]})"),
        ConfigError);
    CHECK_THROWS_AS(
        load(R"({"members": [{"id": "a", "url": "http://x/", "latency_ms": -3}]})"),
        ConfigError);
    CHECK_THROWS_AS(
        load(R"({"members": [{"id": "a", "url": "http://x/"},
                              {"id": "a", "url": "http://y/"}]})"),
        ConfigError);
    CHECK_THROWS_AS(load(R"({"members": [{"id": "a", "url": "no-scheme"}]})"), ConfigError);
}
