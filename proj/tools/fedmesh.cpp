#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedmesh/bench.hpp"
#include "fedmesh/endpoint.hpp"
#include "fedmesh/errors.hpp"
#include "fedmesh/eval.hpp"
#include "fedmesh/fixtures.hpp"
#include "fedmesh/mediator.hpp"
#include "fedmesh/ntriples.hpp"
#include "fedmesh/results_json.hpp"
#include "fedmesh/service.hpp"
#include "fedmesh/sparql_parser.hpp"
#include "fedmesh/store.hpp"

namespace {

std::atomic<bool> g_stop{false};

void request_stop(int) { g_stop.store(true); }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fedmesh::ConfigError("cannot read " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fedmesh::ConfigError("cannot write " + path.string());
    out << text;
}

int cmd_load(const std::vector<std::filesystem::path>& files) {
    fedmesh::Store store;
    std::size_t statements = 0;
    for (const auto& file : files) {
        const auto triples = fedmesh::parse_ntriples_file(file);
        statements += triples.size();
        for (const auto& t : triples) store.insert(t);
        std::cout << file.string() << ": " << triples.size() << " statements\n";
    }
    std::cout << "total: " << statements << " statements, " << store.size()
              << " unique triples\n";
    return 0;
}

int cmd_query(const std::vector<std::filesystem::path>& stores,
              const std::filesystem::path& query_file) {
    fedmesh::Store store;
    for (const auto& file : stores) fedmesh::load_ntriples_file(store, file);
    const auto query = fedmesh::parse_query(read_file(query_file));
    std::cout << fedmesh::serialize_results(fedmesh::evaluate(store, query)) << "\n";
    return 0;
}

int cmd_serve(const std::filesystem::path& config) {
    fedmesh::SparqlService service(fedmesh::ServiceConfig::from_file(config));
    std::signal(SIGINT, request_stop);
    std::signal(SIGTERM, request_stop);
    service.start(&std::cerr);
    std::cerr << "serving on port " << service.port() << "; interrupt to stop\n";
    while (!g_stop.load() && service.running()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    service.stop();
    std::cerr << "stopped\n";
    return 0;
}

int cmd_mediate(const std::filesystem::path& federation_cfg,
                const std::filesystem::path& query_file,
                const fedmesh::MediatorOptions& options,
                const std::filesystem::path& trace_file) {
    fedmesh::Federation fed = fedmesh::Federation::from_config_file(federation_cfg);
    fedmesh::Mediator mediator(fed, options);
    const std::string text = read_file(query_file);

    const auto emit_trace = [&](const fedmesh::ExecutionTrace& trace) {
        if (trace_file.empty()) {
            std::cerr << trace.to_json() << "\n";
        } else {
            write_text(trace_file, trace.to_json() + "\n");
        }
    };

    try {
        const fedmesh::MediateResult result = mediator.mediate(text);
        std::cout << fedmesh::serialize_results(result.solutions) << "\n";
        emit_trace(result.trace);
        return 0;
    } catch (const fedmesh::MediateError& e) {
        emit_trace(e.trace());
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_bench(const std::filesystem::path& config) {
    const fedmesh::Report report = fedmesh::run_benchmark(fedmesh::BenchConfig::from_file(config));
    std::cout << fedmesh::report_markdown(report);
    return 0;
}

int cmd_gen_fixtures(const fedmesh::FixtureSpec& spec, const std::filesystem::path& out,
                     const std::filesystem::path& corpus) {
    const fedmesh::Fixtures fx = fedmesh::generate_fixtures(spec);
    fedmesh::write_fixtures(fx, out, corpus);
    std::size_t smallest = fx.stores.front().size();
    std::size_t largest = smallest;
    for (const auto& s : fx.stores) {
        smallest = std::min(smallest, s.size());
        largest = std::max(largest, s.size());
    }
    std::cout << "wrote " << fx.stores.size() << " members (" << smallest << ".." << largest
              << " triples each) to " << out.string() << "\n";
    return 0;
}

int cmd_analyze(const std::filesystem::path& federation_cfg,
                const std::filesystem::path& corpus_dir, const std::string& format) {
    fedmesh::Federation fed = fedmesh::Federation::from_config_file(federation_cfg);
    const auto corpus = fedmesh::load_corpus({corpus_dir});
    const auto selection = fedmesh::source_selection_report(corpus, fed);

    if (format == "json") {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& s : selection) {
            rows.push_back({{"query", s.query},
                            {"patterns", s.pattern_count},
                            {"min_sources", s.min},
                            {"max_sources", s.max},
                            {"avg_sources", s.avg}});
        }
        std::cout << rows.dump(2) << "\n";
        return 0;
    }
    if (format == "csv") {
        std::cout << "query,patterns,min_sources,max_sources,avg_sources\n";
        for (const auto& s : selection) {
            std::printf("%s,%zu,%zu,%zu,%.2f\n", s.query.c_str(), s.pattern_count,
                        s.min, s.max, s.avg);
        }
        return 0;
    }
    std::cout << "| query | patterns | min | max | avg |\n";
    std::cout << "| --- | ---: | ---: | ---: | ---: |\n";
    for (const auto& s : selection) {
        std::printf("| %s | %zu | %zu | %zu | %.2f |\n", s.query.c_str(), s.pattern_count,
                    s.min, s.max, s.avg);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"federated SPARQL mediator and benchmark toolkit"};
    app.require_subcommand(1);

    std::vector<std::filesystem::path> load_files;
    auto* load = app.add_subcommand("load", "Validate N-Triples files and report counts");
    load->add_option("files", load_files, "N-Triples files")->required();

    std::vector<std::filesystem::path> query_stores;
    std::filesystem::path query_file;
    auto* query = app.add_subcommand("query", "Evaluate a query against local data");
    query->add_option("--store", query_stores, "N-Triples files loaded into one store")
        ->required();
    query->add_option("--query", query_file, "SPARQL query file")->required();

    std::filesystem::path serve_config;
    auto* serve = app.add_subcommand("serve", "Run the SPARQL endpoint service");
    serve->add_option("--config", serve_config, "service config (JSON)")->required();

    std::filesystem::path med_federation, med_query, med_trace;
    fedmesh::MediatorOptions med_options;
    bool med_no_cache = false, med_no_groups = false;
    auto* mediate = app.add_subcommand("mediate", "Run a query through the federation mediator");
    mediate->add_option("--federation", med_federation, "federation config (JSON)")->required();
    mediate->add_option("--query", med_query, "SPARQL query file")->required();
    mediate->add_flag("--no-cache", med_no_cache, "disable the source selection cache");
    mediate->add_flag("--no-groups", med_no_groups, "disable exclusive grouping");
    mediate->add_option("--parallel", med_options.parallelism, "bound-join requests in flight")
        ->check(CLI::PositiveNumber);
    mediate->add_flag("--skip-unreachable", med_options.skip_unreachable,
                      "treat unreachable members as irrelevant");
    mediate->add_option("--trace", med_trace, "write the execution trace here (default stderr)");

    std::filesystem::path bench_config;
    auto* bench = app.add_subcommand("bench", "Run the benchmark protocol from a config");
    bench->add_option("--config", bench_config, "benchmark config (JSON)")->required();

    fedmesh::FixtureSpec fixture_spec;
    std::filesystem::path gen_out, gen_corpus;
    auto* gen = app.add_subcommand("gen-fixtures", "Generate a synthetic federation");
    gen->add_option("--seed", fixture_spec.seed, "generator seed");
    gen->add_option("--members", fixture_spec.members, "federation size")
        ->check(CLI::PositiveNumber);
    gen->add_flag("--overlap", fixture_spec.overlap, "copy entities to a second same-role member");
    gen->add_option("--min-triples", fixture_spec.min_member_triples,
                    "noise-padding floor per member");
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--corpus", gen_corpus,
                    "query corpus; adds expected row counts to the manifest");

    std::filesystem::path an_federation, an_corpus;
    std::string an_format = "markdown";
    auto* analyze = app.add_subcommand("analyze", "Per-query source selection statistics");
    analyze->add_option("--federation", an_federation, "federation config (JSON)")->required();
    analyze->add_option("--corpus", an_corpus, "query corpus directory")->required();
    analyze->add_option("--format", an_format, "markdown, json, or csv")
        ->check(CLI::IsMember({"markdown", "json", "csv"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*load) return cmd_load(load_files);
        if (*query) return cmd_query(query_stores, query_file);
        if (*serve) return cmd_serve(serve_config);
        if (*mediate) {
            med_options.use_cache = !med_no_cache;
            med_options.form_groups = !med_no_groups;
            return cmd_mediate(med_federation, med_query, med_options, med_trace);
        }
        if (*bench) return cmd_bench(bench_config);
        if (*gen) return cmd_gen_fixtures(fixture_spec, gen_out, gen_corpus);
        if (*analyze) return cmd_analyze(an_federation, an_corpus, an_format);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
