#include "fedmesh/endpoint.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "fedmesh/errors.hpp"
#include "fedmesh/eval.hpp"
#include "fedmesh/ntriples.hpp"
#include "fedmesh/results_json.hpp"
#include "fedmesh/sparql_parser.hpp"
#include "fedmesh/sparql_text.hpp"

namespace fedmesh {

RequestStats RequestStats::since(const RequestStats& earlier) const {
    RequestStats d;
    d.select_requests = select_requests - earlier.select_requests;
    d.ask_requests = ask_requests - earlier.ask_requests;
    d.bytes_received = bytes_received - earlier.bytes_received;
    d.cumulative_wait_ms = cumulative_wait_ms - earlier.cumulative_wait_ms;
    return d;
}

Endpoint::Endpoint(std::string id, LatencySpec latency, std::uint64_t seed)
    : id_(std::move(id)), latency_(latency), rng_(seed) {
    if (id_.empty()) throw ConfigError("endpoint id must be non-empty");
    if (latency.fixed_ms < 0 || latency.jitter_ms < 0) {
        throw ConfigError("endpoint '" + id_ + "': latency must be >= 0");
    }
}

LatencySpec Endpoint::latency() const {
    std::lock_guard<std::mutex> lock(latency_mu_);
    return latency_;
}

void Endpoint::set_latency(LatencySpec latency) {
    if (latency.fixed_ms < 0 || latency.jitter_ms < 0) {
        throw ConfigError("endpoint '" + id_ + "': latency must be >= 0");
    }
    std::lock_guard<std::mutex> lock(latency_mu_);
    latency_ = latency;
}

void Endpoint::inject_latency() {
    const LatencySpec spec = latency();
    if (spec.is_zero()) return;
    const double delay_ms = spec.fixed_ms + rng_.unit() * spec.jitter_ms;
    wait_micros_.fetch_add(static_cast<std::uint64_t>(std::llround(delay_ms * 1000.0)),
                           std::memory_order_relaxed);
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay_ms));
}

SolutionSeq Endpoint::select(const std::string& query_text) {
    select_requests_.fetch_add(1, std::memory_order_relaxed);
    inject_latency();
    return do_select(query_text);
}

bool Endpoint::ask(const TriplePattern& pattern) {
    ask_requests_.fetch_add(1, std::memory_order_relaxed);
    inject_latency();
    return do_ask(pattern);
}

RequestStats Endpoint::stats() const {
    RequestStats s;
    s.select_requests = select_requests_.load(std::memory_order_relaxed);
    s.ask_requests = ask_requests_.load(std::memory_order_relaxed);
    s.bytes_received = bytes_received_.load(std::memory_order_relaxed);
    s.cumulative_wait_ms =
        static_cast<double>(wait_micros_.load(std::memory_order_relaxed)) / 1000.0;
    return s;
}

void Endpoint::reset_stats() {
    select_requests_.store(0, std::memory_order_relaxed);
    ask_requests_.store(0, std::memory_order_relaxed);
    bytes_received_.store(0, std::memory_order_relaxed);
    wait_micros_.store(0, std::memory_order_relaxed);
}

InProcessEndpoint::InProcessEndpoint(std::string id, Store store, LatencySpec latency,
                                     std::uint64_t seed)
    : Endpoint(std::move(id), latency, seed), store_(std::move(store)) {}

SolutionSeq InProcessEndpoint::do_select(const std::string& query_text) {
    return evaluate(store_, parse_query(query_text));
}

bool InProcessEndpoint::do_ask(const TriplePattern& pattern) {
    return store_.ask(pattern);
}

// Keep-alive connections, reused across requests; at most pool_size retained.
struct RemoteEndpoint::ClientPool {
    std::mutex mu;
    std::vector<std::unique_ptr<httplib::Client>> idle;
    std::string origin;
    int timeout_seconds = 30;
    std::size_t cap = 16;

    std::unique_ptr<httplib::Client> acquire() {
        {
            std::lock_guard<std::mutex> lock(mu);
            if (!idle.empty()) {
                auto client = std::move(idle.back());
                idle.pop_back();
                return client;
            }
        }
        auto client = std::make_unique<httplib::Client>(origin);
        client->set_connection_timeout(timeout_seconds, 0);
        client->set_read_timeout(timeout_seconds, 0);
        client->set_keep_alive(true);
        return client;
    }

    void release(std::unique_ptr<httplib::Client> client) {
        std::lock_guard<std::mutex> lock(mu);
        if (idle.size() < cap) idle.push_back(std::move(client));
    }
};

namespace {

// Splits "http://host:port/some/path" into origin and path.
void split_url(const std::string& url, std::string& origin, std::string& path) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint url '" + url + "' lacks a scheme");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        origin = url;
        path = "/";
    } else {
        origin = url.substr(0, path_start);
        path = url.substr(path_start);
    }
}

constexpr std::size_t kGetUrlLimit = 2048;

}  // namespace

RemoteEndpoint::RemoteEndpoint(std::string id, const std::string& url, LatencySpec latency,
                               std::uint64_t seed, int timeout_seconds,
                               std::size_t pool_size)
    : Endpoint(std::move(id), latency, seed),
      url_(url),
      timeout_seconds_(timeout_seconds),
      pool_(std::make_unique<ClientPool>()) {
    split_url(url, origin_, path_);
    pool_->origin = origin_;
    pool_->timeout_seconds = timeout_seconds;
    pool_->cap = pool_size ? pool_size : 1;
}

RemoteEndpoint::~RemoteEndpoint() = default;

std::string RemoteEndpoint::http_request(const std::string& query_text) {
    auto client = pool_->acquire();
    const httplib::Headers headers = {{"Accept", "application/sparql-results+json"}};

    httplib::Result result;
    const std::string get_target =
        path_ + "?query=" + httplib::detail::encode_query_param(query_text);
    if (origin_.size() + get_target.size() <= kGetUrlLimit) {
        result = client->Get(get_target, headers);
    } else {
        result = client->Post(path_, headers, httplib::Params{{"query", query_text}});
    }

    if (!result) {
        // A dead keep-alive connection stays out of the pool.
        throw EndpointUnreachableError(id(), httplib::to_string(result.error()));
    }
    pool_->release(std::move(client));

    if (result->status != 200) {
        std::string excerpt = result->body.substr(0, 200);
        throw ProtocolError(id(), result->status, excerpt);
    }
    add_bytes(result->body.size());
    return result->body;
}

SolutionSeq RemoteEndpoint::do_select(const std::string& query_text) {
    return parse_results(http_request(query_text));
}

bool RemoteEndpoint::do_ask(const TriplePattern& pattern) {
    SolutionSeq seq = parse_results(http_request(ask_subquery(pattern)));
    if (!seq.boolean.has_value()) {
        throw ProtocolError(id(), 200, "expected a boolean ASK response");
    }
    return *seq.boolean;
}

void Federation::add(std::shared_ptr<Endpoint> endpoint) {
    if (!endpoint) throw ConfigError("null endpoint");
    if (find(endpoint->id()) != nullptr) {
        throw ConfigError("duplicate endpoint id '" + endpoint->id() + "'");
    }
    members_.push_back(std::move(endpoint));
}

Endpoint* Federation::find(const std::string& id) const {
    for (const auto& m : members_) {
        if (m->id() == id) return m.get();
    }
    return nullptr;
}

std::map<std::string, RequestStats> Federation::snapshot_counters() const {
    std::map<std::string, RequestStats> snapshot;
    for (const auto& m : members_) snapshot[m->id()] = m->stats();
    return snapshot;
}

void Federation::reset_counters() {
    for (const auto& m : members_) m->reset_stats();
}

Store Federation::merged_store() const {
    std::vector<const Store*> stores;
    stores.reserve(members_.size());
    for (const auto& m : members_) {
        auto* in_process = dynamic_cast<const InProcessEndpoint*>(m.get());
        if (in_process == nullptr) {
            throw Error("merged_store requires an all-in-process federation; '" +
                        m->id() + "' is remote");
        }
        stores.push_back(&in_process->store());
    }
    return Store::merge(stores);
}

Federation Federation::from_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open federation config '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_config_json(buffer.str(), path.parent_path());
}

Federation Federation::from_config_json(const std::string& json_text,
                                        const std::filesystem::path& base_dir) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("federation config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("members") || !doc["members"].is_array() ||
        doc["members"].empty()) {
        throw ConfigError("federation config needs a non-empty 'members' array");
    }
    const std::uint64_t seed = doc.value("seed", 0ull);

    Federation federation;
    std::size_t index = 0;
    for (const auto& entry : doc["members"]) {
        if (!entry.is_object() || !entry.contains("id") || !entry["id"].is_string()) {
            throw ConfigError("each member needs a string 'id'");
        }
        const std::string id = entry["id"].get<std::string>();
        LatencySpec latency;
        latency.fixed_ms = entry.value("latency_ms", 0.0);
        latency.jitter_ms = entry.value("jitter_ms", 0.0);
        const std::uint64_t member_seed = SplitMix64::mix(seed, index++);

        const bool has_data = entry.contains("data");
        const bool has_url = entry.contains("url");
        if (has_data == has_url) {
            throw ConfigError("member '" + id + "' needs exactly one of 'data' or 'url'");
        }
        if (has_url) {
            federation.add(std::make_shared<RemoteEndpoint>(
                id, entry["url"].get<std::string>(), latency, member_seed));
            continue;
        }
        std::vector<std::string> files;
        if (entry["data"].is_string()) {
            files.push_back(entry["data"].get<std::string>());
        } else if (entry["data"].is_array()) {
            for (const auto& f : entry["data"]) files.push_back(f.get<std::string>());
        } else {
            throw ConfigError("member '" + id + "': 'data' must be a file or file list");
        }
        Store store;
        for (const auto& file : files) {
            std::filesystem::path p(file);
            if (p.is_relative()) p = base_dir / p;
            load_ntriples_file(store, p);
        }
        federation.add(
            std::make_shared<InProcessEndpoint>(id, std::move(store), latency, member_seed));
    }
    return federation;
}

}  // namespace fedmesh
