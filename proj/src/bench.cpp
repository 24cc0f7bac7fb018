#include "fedmesh/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fedmesh/errors.hpp"
#include "fedmesh/sparql_parser.hpp"

namespace fedmesh {

namespace {

using ordered_json = nlohmann::ordered_json;

double round3(double ms) { return std::round(ms * 1000.0) / 1000.0; }

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw Error("number formatting failed");
    return std::string(buf, end);
}

double parse_double(const std::string& text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw Error("malformed number in report: " + text);
    return v;
}

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

CachingMode parse_caching(const std::string& text) {
    if (text == "on") return CachingMode::On;
    if (text == "off") return CachingMode::Off;
    if (text == "both") return CachingMode::Both;
    throw ConfigError("caching must be one of on|off|both, got \"" + text + "\"");
}

Scenario parse_scenario(const std::string& text) {
    if (text == "local") return Scenario::Local;
    if (text == "hybrid") return Scenario::Hybrid;
    throw ConfigError("scenario must be local or hybrid, got \"" + text + "\"");
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& path) {
    std::filesystem::path p(path);
    return p.is_absolute() ? p : base / p;
}

// csv cells quote only when the content demands it.
std::string csv_quote(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

std::vector<std::string> split_on(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string part;
    for (char c : text) {
        if (c == sep) {
            parts.push_back(std::move(part));
            part.clear();
        } else {
            part += c;
        }
    }
    if (!part.empty()) parts.push_back(std::move(part));
    return parts;
}

std::string join_counts(const std::map<std::string, std::uint64_t>& counts) {
    std::string out;
    for (const auto& [id, n] : counts) {
        if (!out.empty()) out += ';';
        out += id + ":" + std::to_string(n);
    }
    return out;
}

std::map<std::string, std::uint64_t> parse_counts(const std::string& text) {
    std::map<std::string, std::uint64_t> out;
    for (const auto& part : split_on(text, ';')) {
        auto colon = part.rfind(':');
        if (colon == std::string::npos) throw Error("malformed count cell: " + text);
        out[part.substr(0, colon)] = std::stoull(part.substr(colon + 1));
    }
    return out;
}

const char* kCsvHeader =
    "query,scenario,caching,geo_mean_ms,runs_ms,result_rows,select_requests,"
    "ask_requests,ask_saved,savings,per_endpoint_select,per_endpoint_ask,error";

}  // namespace

double geometric_mean(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("geometric mean of an empty list");
    double log_sum = 0.0;
    for (double v : values) {
        if (!(v > 0.0))
            throw std::invalid_argument("geometric mean requires positive values");
        log_sum += std::log(v);
    }
    return std::exp(log_sum / static_cast<double>(values.size()));
}

BenchConfig BenchConfig::from_file(const std::filesystem::path& path) {
    return from_json(read_file(path), path.parent_path());
}

BenchConfig BenchConfig::from_json(const std::string& json_text,
                                   const std::filesystem::path& base_dir) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const ordered_json::exception& e) {
        throw ConfigError(std::string("benchmark config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("benchmark config must be a JSON object");

    BenchConfig config;
    if (!doc.contains("federation") || !doc["federation"].is_string())
        throw ConfigError("benchmark config needs a \"federation\" path");
    config.federation = resolve(base_dir, doc["federation"].get<std::string>());

    if (!doc.contains("corpus")) throw ConfigError("benchmark config needs \"corpus\"");
    const auto& corpus = doc["corpus"];
    if (corpus.is_string()) {
        config.corpus.push_back(resolve(base_dir, corpus.get<std::string>()));
    } else if (corpus.is_array() && !corpus.empty()) {
        for (const auto& item : corpus) {
            if (!item.is_string()) throw ConfigError("corpus entries must be paths");
            config.corpus.push_back(resolve(base_dir, item.get<std::string>()));
        }
    } else {
        throw ConfigError("corpus must be a path or non-empty array of paths");
    }

    if (doc.contains("warmup_runs")) {
        if (!doc["warmup_runs"].is_number_integer() || doc["warmup_runs"].get<int>() < 0)
            throw ConfigError("warmup_runs must be an integer >= 0");
        config.warmup_runs = doc["warmup_runs"].get<int>();
    }
    if (doc.contains("measured_runs")) {
        if (!doc["measured_runs"].is_number_integer() ||
            doc["measured_runs"].get<int>() < 1)
            throw ConfigError("measured_runs must be an integer >= 1");
        config.measured_runs = doc["measured_runs"].get<int>();
    }
    if (doc.contains("caching"))
        config.caching = parse_caching(doc["caching"].get<std::string>());
    if (doc.contains("scenario"))
        config.scenario = parse_scenario(doc["scenario"].get<std::string>());

    if (doc.contains("hybrid_latency")) {
        if (!doc["hybrid_latency"].is_object())
            throw ConfigError("hybrid_latency must map endpoint ids to latencies");
        for (const auto& [id, spec] : doc["hybrid_latency"].items()) {
            LatencySpec latency;
            if (spec.is_number()) {
                latency.fixed_ms = spec.get<double>();
            } else if (spec.is_object()) {
                latency.fixed_ms = spec.value("fixed_ms", 0.0);
                latency.jitter_ms = spec.value("jitter_ms", 0.0);
            } else {
                throw ConfigError("hybrid_latency values must be numbers or objects");
            }
            if (latency.fixed_ms < 0 || latency.jitter_ms < 0)
                throw ConfigError("hybrid_latency values must be >= 0");
            config.hybrid_latency[id] = latency;
        }
    }

    if (doc.contains("parallelism")) {
        if (!doc["parallelism"].is_number_integer() || doc["parallelism"].get<int>() < 1)
            throw ConfigError("parallelism must be an integer >= 1");
        config.parallelism = doc["parallelism"].get<std::size_t>();
    }
    if (doc.contains("skip_unreachable"))
        config.skip_unreachable = doc["skip_unreachable"].get<bool>();

    if (doc.contains("output")) {
        const auto& out = doc["output"];
        if (!out.is_object()) throw ConfigError("output must be an object");
        if (out.contains("json"))
            config.output_json = resolve(base_dir, out["json"].get<std::string>());
        if (out.contains("csv"))
            config.output_csv = resolve(base_dir, out["csv"].get<std::string>());
        if (out.contains("markdown"))
            config.output_markdown = resolve(base_dir, out["markdown"].get<std::string>());
    }
    return config;
}

std::vector<std::pair<std::string, std::string>> load_corpus(
    const std::vector<std::filesystem::path>& paths) {
    std::vector<std::pair<std::string, std::string>> corpus;
    for (const auto& path : paths) {
        if (std::filesystem::is_directory(path)) {
            for (const auto& entry : std::filesystem::directory_iterator(path)) {
                if (entry.is_regular_file() && entry.path().extension() == ".rq")
                    corpus.emplace_back(entry.path().stem().string(),
                                        read_file(entry.path()));
            }
        } else if (std::filesystem::is_regular_file(path)) {
            corpus.emplace_back(path.stem().string(), read_file(path));
        } else {
            throw ConfigError("corpus path does not exist: " + path.string());
        }
    }
    std::sort(corpus.begin(), corpus.end());
    if (corpus.empty()) throw ConfigError("corpus contains no queries");
    return corpus;
}

std::vector<SelectionEntry> source_selection_report(
    const std::vector<std::pair<std::string, std::string>>& corpus,
    Federation& federation) {
    Mediator mediator(federation, {.use_cache = false});
    std::vector<SelectionEntry> out;
    for (const auto& [name, text] : corpus) {
        Query query = parse_query(text);
        SelectionEntry entry;
        entry.query = name;
        const auto patterns = query.where->all_patterns();
        entry.pattern_count = patterns.size();
        if (!patterns.empty()) {
            ExecutionTrace trace;
            SourceMap map = mediator.select_sources(patterns, trace);
            std::size_t lo = SIZE_MAX, hi = 0, sum = 0;
            for (const auto& decision : map) {
                lo = std::min(lo, decision.relevant.size());
                hi = std::max(hi, decision.relevant.size());
                sum += decision.relevant.size();
            }
            entry.min = lo;
            entry.max = hi;
            entry.avg = static_cast<double>(sum) / static_cast<double>(patterns.size());
        }
        out.push_back(std::move(entry));
    }
    return out;
}

namespace {

// One caching arm of one query: fresh mediator, warmups, then timed runs.
BenchEntry run_arm(Federation& federation, const BenchConfig& config,
                   const std::string& name, const std::string& text, bool use_cache) {
    BenchEntry entry;
    entry.query = name;
    entry.caching = use_cache ? "on" : "off";
    try {
        MediatorOptions options;
        options.use_cache = use_cache;
        options.parallelism = config.parallelism;
        options.skip_unreachable = config.skip_unreachable;
        Mediator mediator(federation, options);
        mediator.cache().flush();  // the cold arm starts genuinely cold

        for (int i = 0; i < config.warmup_runs; ++i) mediator.mediate(text);

        std::vector<double> times;
        std::optional<std::uint64_t> rows;
        for (int i = 0; i < config.measured_runs; ++i) {
            auto before = federation.snapshot_counters();
            const auto t0 = std::chrono::steady_clock::now();
            MediateResult result = mediator.mediate(text);
            const auto t1 = std::chrono::steady_clock::now();
            times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());

            const std::uint64_t cardinality =
                result.solutions.is_ask() ? (*result.solutions.boolean ? 1 : 0)
                                          : result.solutions.rows.size();
            if (rows && *rows != cardinality)
                throw Error("result cardinality varied across runs");
            rows = cardinality;
            entry.result_rows = cardinality;

            // The last run's counter deltas are the steady-state accounting.
            entry.per_endpoint_select.clear();
            entry.per_endpoint_ask.clear();
            entry.select_requests = 0;
            entry.ask_requests = 0;
            auto after = federation.snapshot_counters();
            for (const auto& [id, stats] : after) {
                RequestStats delta = stats.since(before.at(id));
                entry.per_endpoint_select[id] = delta.select_requests;
                entry.per_endpoint_ask[id] = delta.ask_requests;
                entry.select_requests += delta.select_requests;
                entry.ask_requests += delta.ask_requests;
            }
            entry.ask_saved = result.trace.ask_saved;
        }
        entry.geo_mean_ms = round3(geometric_mean(times));
        for (double& t : times) t = round3(t);
        entry.run_ms = std::move(times);
    } catch (const std::exception& e) {
        entry.error = e.what();
    }
    return entry;
}

}  // namespace

Report run_benchmark(const BenchConfig& config) {
    Federation federation = Federation::from_config_file(config.federation);
    if (config.scenario == Scenario::Hybrid) {
        for (const auto& [id, latency] : config.hybrid_latency) {
            Endpoint* member = federation.find(id);
            if (member == nullptr)
                throw ConfigError("hybrid_latency names unknown member \"" + id + "\"");
            member->set_latency(latency);
        }
    }

    Report report;
    report.scenario = config.scenario == Scenario::Hybrid ? "hybrid" : "local";
    report.federation = config.federation.string();

    const auto corpus = load_corpus(config.corpus);

    // Selection stats first; their probes must not pollute the benchmark
    // counters, so reset afterwards.
    for (const auto& [name, text] : corpus) {
        try {
            auto entries = source_selection_report({{name, text}}, federation);
            report.selection.push_back(entries.front());
        } catch (const std::exception&) {
            // The benchmark arm below reports the failure.
        }
    }
    federation.reset_counters();

    for (const auto& [name, text] : corpus) {
        BenchEntry off, on;
        const bool run_off = config.caching != CachingMode::On;
        const bool run_on = config.caching != CachingMode::Off;
        if (run_off) off = run_arm(federation, config, name, text, false);
        if (run_on) on = run_arm(federation, config, name, text, true);
        if (run_off && run_on && off.error.empty() && on.error.empty() &&
            off.ask_requests >= on.ask_requests) {
            off.savings = off.ask_requests - on.ask_requests;
            on.savings = off.savings;
        }
        if (run_off) report.entries.push_back(std::move(off));
        if (run_on) report.entries.push_back(std::move(on));
    }

    emit_report(report, config);
    return report;
}

std::string report_json(const Report& report) {
    ordered_json doc;
    doc["scenario"] = report.scenario;
    doc["federation"] = report.federation;
    doc["queries"] = ordered_json::array();
    for (const auto& e : report.entries) {
        ordered_json item;
        item["query"] = e.query;
        item["scenario"] = report.scenario;
        item["caching"] = e.caching;
        item["geo_mean_ms"] = e.geo_mean_ms;
        item["runs_ms"] = e.run_ms;
        item["result_rows"] = e.result_rows;
        item["select_requests"] = e.select_requests;
        item["ask_requests"] = e.ask_requests;
        item["ask_saved"] = e.ask_saved;
        item["per_endpoint_select"] = e.per_endpoint_select;
        item["per_endpoint_ask"] = e.per_endpoint_ask;
        if (e.savings) item["savings"] = *e.savings;
        if (!e.error.empty()) item["error"] = e.error;
        doc["queries"].push_back(std::move(item));
    }
    doc["selection"] = ordered_json::array();
    for (const auto& s : report.selection) {
        ordered_json item;
        item["query"] = s.query;
        item["pattern_count"] = s.pattern_count;
        item["min"] = s.min;
        item["max"] = s.max;
        item["avg"] = s.avg;
        doc["selection"].push_back(std::move(item));
    }
    return doc.dump(2) + "\n";
}

Report report_from_json(const std::string& text) {
    ordered_json doc = ordered_json::parse(text);
    Report report;
    report.scenario = doc.value("scenario", "");
    report.federation = doc.value("federation", "");
    for (const auto& item : doc.value("queries", ordered_json::array())) {
        BenchEntry e;
        e.query = item.at("query").get<std::string>();
        e.caching = item.at("caching").get<std::string>();
        e.geo_mean_ms = item.at("geo_mean_ms").get<double>();
        e.run_ms = item.at("runs_ms").get<std::vector<double>>();
        e.result_rows = item.at("result_rows").get<std::uint64_t>();
        e.select_requests = item.at("select_requests").get<std::uint64_t>();
        e.ask_requests = item.at("ask_requests").get<std::uint64_t>();
        e.ask_saved = item.at("ask_saved").get<std::uint64_t>();
        e.per_endpoint_select =
            item.value("per_endpoint_select",
                       std::map<std::string, std::uint64_t>{});
        e.per_endpoint_ask =
            item.value("per_endpoint_ask", std::map<std::string, std::uint64_t>{});
        if (item.contains("savings")) e.savings = item["savings"].get<std::uint64_t>();
        e.error = item.value("error", "");
        report.entries.push_back(std::move(e));
    }
    for (const auto& item : doc.value("selection", ordered_json::array())) {
        SelectionEntry s;
        s.query = item.at("query").get<std::string>();
        s.pattern_count = item.at("pattern_count").get<std::size_t>();
        s.min = item.at("min").get<std::size_t>();
        s.max = item.at("max").get<std::size_t>();
        s.avg = item.at("avg").get<double>();
        report.selection.push_back(std::move(s));
    }
    return report;
}

std::string report_csv(const Report& report) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& e : report.entries) {
        std::string runs;
        for (std::size_t i = 0; i < e.run_ms.size(); ++i) {
            if (i) runs += ';';
            runs += format_double(e.run_ms[i]);
        }
        std::vector<std::string> cells = {
            e.query,
            report.scenario,
            e.caching,
            format_double(e.geo_mean_ms),
            runs,
            std::to_string(e.result_rows),
            std::to_string(e.select_requests),
            std::to_string(e.ask_requests),
            std::to_string(e.ask_saved),
            e.savings ? std::to_string(*e.savings) : "",
            join_counts(e.per_endpoint_select),
            join_counts(e.per_endpoint_ask),
            e.error,
        };
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += csv_quote(cells[i]);
        }
        out += '\n';
    }
    return out;
}

Report report_from_csv(const std::string& text) {
    std::vector<std::string> lines = split_on(text, '\n');
    if (lines.empty() || lines[0] != kCsvHeader)
        throw Error("unrecognized report csv header");
    Report report;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto cells = csv_split(lines[i]);
        if (cells.size() != 13) throw Error("malformed report csv row");
        BenchEntry e;
        e.query = cells[0];
        report.scenario = cells[1];
        e.caching = cells[2];
        e.geo_mean_ms = parse_double(cells[3]);
        for (const auto& part : split_on(cells[4], ';'))
            e.run_ms.push_back(parse_double(part));
        e.result_rows = std::stoull(cells[5]);
        e.select_requests = std::stoull(cells[6]);
        e.ask_requests = std::stoull(cells[7]);
        e.ask_saved = std::stoull(cells[8]);
        if (!cells[9].empty()) e.savings = std::stoull(cells[9]);
        e.per_endpoint_select = parse_counts(cells[10]);
        e.per_endpoint_ask = parse_counts(cells[11]);
        e.error = cells[12];
        report.entries.push_back(std::move(e));
    }
    return report;
}

std::string report_markdown(const Report& report) {
    std::string out = "# Benchmark report (" + report.scenario + ")\n\n";
    out += "Federation: `" + report.federation + "`\n\n";
    out += "| Query | Caching | GeoMean (ms) | #Req | #SELECT | #ASK | #Savings | Rows | Error |\n";
    out += "|---|---|---:|---:|---:|---:|---:|---:|---|\n";
    for (const auto& e : report.entries) {
        out += "| " + e.query + " | " + e.caching + " | " + fixed3(e.geo_mean_ms) +
               " | " + std::to_string(e.total_requests()) + " | " +
               std::to_string(e.select_requests) + " | " +
               std::to_string(e.ask_requests) + " | " +
               (e.savings ? std::to_string(*e.savings) : "-") + " | " +
               std::to_string(e.result_rows) + " | " + (e.error.empty() ? "-" : e.error) +
               " |\n";
    }
    out += "\n## Source selection\n\n";
    out += "| Query | #Patterns | Min | Max | Avg |\n";
    out += "|---|---:|---:|---:|---:|\n";
    for (const auto& s : report.selection) {
        char avg[32];
        std::snprintf(avg, sizeof(avg), "%.2f", s.avg);
        out += "| " + s.query + " | " + std::to_string(s.pattern_count) + " | " +
               std::to_string(s.min) + " | " + std::to_string(s.max) + " | " + avg +
               " |\n";
    }
    return out;
}

void emit_report(const Report& report, const BenchConfig& config) {
    auto write = [](const std::filesystem::path& path, const std::string& content) {
        if (path.empty()) return;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot write " + path.string());
        out << content;
    };
    write(config.output_json, report_json(report));
    write(config.output_csv, report_csv(report));
    write(config.output_markdown, report_markdown(report));
}

}  // namespace fedmesh
