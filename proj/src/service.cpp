#include "fedmesh/service.hpp"

#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>
#include <utility>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

#include "fedmesh/concurrency.hpp"
#include "fedmesh/errors.hpp"
#include "fedmesh/eval.hpp"
#include "fedmesh/ntriples.hpp"
#include "fedmesh/results_json.hpp"
#include "fedmesh/rng.hpp"
#include "fedmesh/sparql_parser.hpp"

namespace fedmesh {

ServiceConfig ServiceConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open service config '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str(), path.parent_path());
}

ServiceConfig ServiceConfig::from_json(const std::string& json_text,
                                       const std::filesystem::path& base_dir) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("service config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("bindings") || !doc["bindings"].is_array() ||
        doc["bindings"].empty()) {
        throw ConfigError("service config needs a non-empty 'bindings' array");
    }

    ServiceConfig config;
    config.port = doc.value("port", 0);
    if (config.port < 0 || config.port > 65535) {
        throw ConfigError("port must be in [0, 65535]");
    }
    config.host = doc.value("host", std::string("127.0.0.1"));

    std::uint64_t index = 0;
    for (const auto& entry : doc["bindings"]) {
        if (!entry.is_object() || !entry.contains("path") || !entry["path"].is_string()) {
            throw ConfigError("each binding needs a string 'path'");
        }
        ServiceBinding binding;
        binding.path = entry["path"].get<std::string>();
        if (binding.path.empty() || binding.path[0] != '/') {
            throw ConfigError("binding path '" + binding.path + "' must start with '/'");
        }
        for (const auto& other : config.bindings) {
            if (other.path == binding.path) {
                throw ConfigError("duplicate binding path '" + binding.path + "'");
            }
        }
        if (entry.contains("data")) {
            if (entry["data"].is_string()) {
                binding.data.emplace_back(entry["data"].get<std::string>());
            } else if (entry["data"].is_array()) {
                for (const auto& f : entry["data"]) {
                    binding.data.emplace_back(f.get<std::string>());
                }
            } else {
                throw ConfigError("binding '" + binding.path +
                                  "': 'data' must be a file or file list");
            }
        }
        for (auto& p : binding.data) {
            if (p.is_relative()) p = base_dir / p;
        }
        binding.latency.fixed_ms = entry.value("latency_ms", 0.0);
        binding.latency.jitter_ms = entry.value("jitter_ms", 0.0);
        if (binding.latency.fixed_ms < 0 || binding.latency.jitter_ms < 0) {
            throw ConfigError("binding '" + binding.path + "': latency must be >= 0");
        }
        binding.max_concurrent = entry.value("max_concurrent", std::size_t{8});
        if (binding.max_concurrent == 0) {
            throw ConfigError("binding '" + binding.path + "': max_concurrent must be >= 1");
        }
        binding.seed = entry.value("seed", SplitMix64::mix(0x73767263ull, index));
        config.bindings.push_back(std::move(binding));
        ++index;
    }
    return config;
}

namespace {

// The server socket uses SO_REUSEPORT, which would let two services share a
// port silently. A plain probe bind (no reuse flags) fails with EADDRINUSE
// whenever anyone holds the port, restoring the conflict-aborts contract.
bool port_is_free(const std::string& host, int port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) return true;
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    }
    const bool free = ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0;
    ::close(fd);
    return free;
}

}  // namespace

struct SparqlService::Impl {
    struct Binding {
        Store store;
        LatencySpec latency;
        FifoGate gate;
        SplitMix64 rng;

        Binding(Store s, LatencySpec l, std::size_t max_concurrent, std::uint64_t seed)
            : store(std::move(s)), latency(l), gate(max_concurrent), rng(seed) {}
    };

    ServiceConfig config;
    int port = 0;
    std::map<std::string, std::unique_ptr<Binding>> bindings;
    httplib::Server server;
    std::thread thread;

    explicit Impl(ServiceConfig c) : config(std::move(c)) {}

    void handle(Binding& binding, const httplib::Request& req, httplib::Response& res) {
        if (!req.has_param("query")) {
            res.status = 400;
            res.set_content("missing 'query' parameter", "text/plain");
            return;
        }
        std::string body;
        try {
            FifoGate::Pass pass(binding.gate);
            const Query query = parse_query(req.get_param_value("query"));
            body = serialize_results(evaluate(binding.store, query));
            const LatencySpec& l = binding.latency;
            if (!l.is_zero()) {
                const double delay_ms = l.fixed_ms + binding.rng.unit() * l.jitter_ms;
                std::this_thread::sleep_for(
                    std::chrono::duration<double, std::milli>(delay_ms));
            }
        } catch (const QueryParseError& e) {
            res.status = 400;
            res.set_content(e.what(), "text/plain");
            return;
        } catch (const UnsupportedFeatureError& e) {
            res.status = 400;
            res.set_content(e.what(), "text/plain");
            return;
        } catch (const std::exception& e) {
            res.status = 500;
            res.set_content(e.what(), "text/plain");
            return;
        }
        res.set_content(body, "application/sparql-results+json");
    }
};

SparqlService::SparqlService(ServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

SparqlService::~SparqlService() { stop(); }

void SparqlService::start(std::ostream* log) {
    if (impl_->config.bindings.empty()) {
        throw ConfigError("service has no bindings");
    }
    for (const auto& spec : impl_->config.bindings) {
        Store store;
        for (const auto& file : spec.data) {
            load_ntriples_file(store, file);
        }
        if (log != nullptr) {
            *log << "binding " << spec.path << ": " << store.size() << " triples\n";
        }
        auto binding = std::make_unique<Impl::Binding>(std::move(store), spec.latency,
                                                       spec.max_concurrent, spec.seed);
        Impl::Binding* raw = binding.get();
        impl_->bindings.emplace(spec.path, std::move(binding));

        auto handler = [this, raw](const httplib::Request& req, httplib::Response& res) {
            impl_->handle(*raw, req, res);
        };
        impl_->server.Get(spec.path, handler);
        impl_->server.Post(spec.path, handler);
    }

    if (impl_->config.port == 0) {
        impl_->port = impl_->server.bind_to_any_port(impl_->config.host);
        if (impl_->port <= 0) {
            throw ConfigError("cannot bind a port on " + impl_->config.host);
        }
    } else {
        if (!port_is_free(impl_->config.host, impl_->config.port)) {
            throw ConfigError("port " + std::to_string(impl_->config.port) +
                              " already in use on " + impl_->config.host);
        }
        if (!impl_->server.bind_to_port(impl_->config.host, impl_->config.port)) {
            throw ConfigError("cannot bind port " + std::to_string(impl_->config.port) +
                              " on " + impl_->config.host);
        }
        impl_->port = impl_->config.port;
    }

    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void SparqlService::stop() {
    if (impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

bool SparqlService::running() const { return impl_->server.is_running(); }

int SparqlService::port() const { return impl_->port; }

std::string SparqlService::url_for(const std::string& binding_path) const {
    return "http://" + impl_->config.host + ":" + std::to_string(impl_->port) +
           binding_path;
}

std::map<std::string, std::size_t> SparqlService::triple_counts() const {
    std::map<std::string, std::size_t> counts;
    for (const auto& [path, binding] : impl_->bindings) {
        counts[path] = binding->store.size();
    }
    return counts;
}

const Store& SparqlService::store(const std::string& binding_path) const {
    auto it = impl_->bindings.find(binding_path);
    if (it == impl_->bindings.end()) {
        throw ConfigError("no binding at path '" + binding_path + "'");
    }
    return it->second->store;
}

}  // namespace fedmesh
