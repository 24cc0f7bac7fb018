#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedmesh {

/// Base class for all fedmesh errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed N-Triples input. Carries the 1-based line number and the
/// offending fragment.
class NtParseError : public Error {
public:
    NtParseError(std::size_t line, std::string fragment, const std::string& msg)
        : Error("N-Triples line " + std::to_string(line) + ": " + msg +
                " (near '" + fragment + "')"),
          line_(line),
          fragment_(std::move(fragment)) {}

    std::size_t line() const { return line_; }
    const std::string& fragment() const { return fragment_; }

private:
    std::size_t line_;
    std::string fragment_;
};

/// SPARQL syntax error with a position in the query text.
class QueryParseError : public Error {
public:
    QueryParseError(std::size_t line, std::size_t column, const std::string& msg)
        : Error("query parse error at " + std::to_string(line) + ":" +
                std::to_string(column) + ": " + msg),
          line_(line),
          column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// A syntactically valid construct outside the supported SPARQL subset.
class UnsupportedFeatureError : public Error {
public:
    explicit UnsupportedFeatureError(const std::string& feature)
        : Error("unsupported SPARQL feature: " + feature), feature_(feature) {}

    const std::string& feature() const { return feature_; }

private:
    std::string feature_;
};

/// A remote endpoint could not be reached (transport failure or timeout).
class EndpointUnreachableError : public Error {
public:
    EndpointUnreachableError(std::string endpoint_id, const std::string& detail)
        : Error("endpoint '" + endpoint_id + "' unreachable: " + detail),
          endpoint_id_(std::move(endpoint_id)) {}

    const std::string& endpoint_id() const { return endpoint_id_; }

private:
    std::string endpoint_id_;
};

/// A remote endpoint answered with a non-200 status.
class ProtocolError : public Error {
public:
    ProtocolError(std::string endpoint_id, int status, std::string body_excerpt)
        : Error("endpoint '" + endpoint_id + "' returned status " +
                std::to_string(status) + ": " + body_excerpt),
          endpoint_id_(std::move(endpoint_id)),
          status_(status),
          body_excerpt_(std::move(body_excerpt)) {}

    const std::string& endpoint_id() const { return endpoint_id_; }
    int status() const { return status_; }
    const std::string& body_excerpt() const { return body_excerpt_; }

private:
    std::string endpoint_id_;
    int status_;
    std::string body_excerpt_;
};

/// Bad configuration file (federation, service, or benchmark).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error("config error: " + msg) {}
};

}  // namespace fedmesh
