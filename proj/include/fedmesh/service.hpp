#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fedmesh/endpoint.hpp"
#include "fedmesh/store.hpp"

namespace fedmesh {

/// One SPARQL endpoint exposed at a URL path.
struct ServiceBinding {
    std::string path;
    std::vector<std::filesystem::path> data;
    LatencySpec latency;
    std::size_t max_concurrent = 8;
    std::uint64_t seed = 0;
};

/// Service configuration: JSON object {port, bindings: [{path, data,
/// latency_ms, jitter_ms, max_concurrent}]}. Port 0 asks the OS for a free
/// port (useful in tests). Relative data paths resolve against the config
/// file's directory.
struct ServiceConfig {
    int port = 0;
    std::string host = "127.0.0.1";
    std::vector<ServiceBinding> bindings;

    static ServiceConfig from_file(const std::filesystem::path& path);
    static ServiceConfig from_json(const std::string& json_text,
                                   const std::filesystem::path& base_dir);
};

/// HTTP server exposing each binding's store as a standard SPARQL endpoint:
/// GET with a `query` parameter or form-encoded POST, results as SPARQL
/// results JSON. Stores load once at startup and stay read-only. Each
/// binding admits at most max_concurrent evaluations at a time (FIFO) and
/// injects its configured latency before the response is written.
class SparqlService {
public:
    explicit SparqlService(ServiceConfig config);
    ~SparqlService();

    SparqlService(const SparqlService&) = delete;
    SparqlService& operator=(const SparqlService&) = delete;

    /// Loads data, binds the port, and serves on a background thread.
    /// Throws ConfigError on load failure or port conflict. When `log` is
    /// non-null, startup prints per-binding triple counts to it.
    void start(std::ostream* log = nullptr);

    /// Graceful shutdown; idempotent.
    void stop();

    bool running() const;

    /// The bound port (resolved when config.port was 0).
    int port() const;

    std::string url_for(const std::string& binding_path) const;

    /// Triple count per binding path, available after start().
    std::map<std::string, std::size_t> triple_counts() const;

    /// The loaded store behind a binding path.
    const Store& store(const std::string& binding_path) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fedmesh
