#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "fedmesh/binding.hpp"
#include "fedmesh/rng.hpp"
#include "fedmesh/store.hpp"
#include "fedmesh/term.hpp"

namespace fedmesh {

/// Artificial delay applied to every request: fixed_ms plus a uniform sample
/// in [0, jitter_ms].
struct LatencySpec {
    double fixed_ms = 0.0;
    double jitter_ms = 0.0;

    bool is_zero() const { return fixed_ms <= 0.0 && jitter_ms <= 0.0; }
};

/// Per-endpoint request accounting. Counters only grow; reset_stats() is the
/// single exception.
struct RequestStats {
    std::uint64_t select_requests = 0;
    std::uint64_t ask_requests = 0;
    std::uint64_t bytes_received = 0;
    double cumulative_wait_ms = 0.0;

    std::uint64_t total_requests() const { return select_requests + ask_requests; }

    /// Counter growth since an earlier snapshot of the same endpoint.
    RequestStats since(const RequestStats& earlier) const;
};

/// One federation member: answers SELECT text and ASK probes, counts every
/// request, and injects its configured latency before answering. Counter
/// updates are atomic; an endpoint accepts concurrent requests.
class Endpoint {
public:
    Endpoint(std::string id, LatencySpec latency, std::uint64_t seed);
    virtual ~Endpoint() = default;

    Endpoint(const Endpoint&) = delete;
    Endpoint& operator=(const Endpoint&) = delete;

    const std::string& id() const { return id_; }

    LatencySpec latency() const;
    /// Reconfigures the injected delay for all subsequent requests.
    void set_latency(LatencySpec latency);

    /// Sends one SELECT (or ASK) query in the supported subset and returns
    /// its solutions. Increments select_requests (ask_requests for ASK text)
    /// by exactly one.
    SolutionSeq select(const std::string& query_text);

    /// True iff the endpoint's data matches the pattern. Increments
    /// ask_requests by exactly one.
    bool ask(const TriplePattern& pattern);

    /// Point-in-time copy of the counters.
    RequestStats stats() const;
    void reset_stats();

protected:
    virtual SolutionSeq do_select(const std::string& query_text) = 0;
    virtual bool do_ask(const TriplePattern& pattern) = 0;

    void add_bytes(std::uint64_t n) { bytes_received_.fetch_add(n, std::memory_order_relaxed); }

private:
    void inject_latency();

    std::string id_;
    mutable std::mutex latency_mu_;
    LatencySpec latency_;
    SplitMix64 rng_;
    std::atomic<std::uint64_t> select_requests_{0};
    std::atomic<std::uint64_t> ask_requests_{0};
    std::atomic<std::uint64_t> bytes_received_{0};
    std::atomic<std::uint64_t> wait_micros_{0};
};

/// Endpoint backed by an in-memory store in this process. Queries run
/// through the same parser and evaluator a service binding would use.
class InProcessEndpoint : public Endpoint {
public:
    InProcessEndpoint(std::string id, Store store, LatencySpec latency = {},
                      std::uint64_t seed = 0);

    const Store& store() const { return store_; }

protected:
    SolutionSeq do_select(const std::string& query_text) override;
    bool do_ask(const TriplePattern& pattern) override;

private:
    Store store_;
};

/// Endpoint reached over the SPARQL HTTP protocol. Short queries travel as
/// GET with a `query` parameter; longer ones switch to a form-encoded POST.
/// Connections are kept alive and pooled up to pool_size concurrent requests.
class RemoteEndpoint : public Endpoint {
public:
    RemoteEndpoint(std::string id, const std::string& url, LatencySpec latency = {},
                   std::uint64_t seed = 0, int timeout_seconds = 30,
                   std::size_t pool_size = 16);
    ~RemoteEndpoint() override;

    const std::string& url() const { return url_; }

protected:
    SolutionSeq do_select(const std::string& query_text) override;
    bool do_ask(const TriplePattern& pattern) override;

private:
    struct ClientPool;
    std::string http_request(const std::string& query_text);

    std::string url_;
    std::string origin_;
    std::string path_;
    int timeout_seconds_;
    std::unique_ptr<ClientPool> pool_;
};

/// Ordered, non-empty collection of endpoints with pairwise-distinct ids.
class Federation {
public:
    Federation() = default;

    /// Rejects duplicate ids with ConfigError.
    void add(std::shared_ptr<Endpoint> endpoint);

    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }

    Endpoint& member(std::size_t index) const { return *members_[index]; }
    const std::vector<std::shared_ptr<Endpoint>>& members() const { return members_; }

    /// nullptr when no member has the id.
    Endpoint* find(const std::string& id) const;

    std::map<std::string, RequestStats> snapshot_counters() const;
    void reset_counters();

    /// Set union of all in-process members' data. Requires every member to
    /// be in-process; the centralized-evaluation oracle in tests needs this.
    Store merged_store() const;

    /// Loads a federation config: JSON object with optional "seed" and a
    /// "members" array of {id, data: [files] | url, latency_ms, jitter_ms}.
    /// Relative data paths resolve against the config file's directory.
    static Federation from_config_file(const std::filesystem::path& path);
    static Federation from_config_json(const std::string& json_text,
                                       const std::filesystem::path& base_dir);

private:
    std::vector<std::shared_ptr<Endpoint>> members_;
};

}  // namespace fedmesh
