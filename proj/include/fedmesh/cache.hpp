#pragma once

#include <map>
#include <optional>
#include <shared_mutex>
#include <string>

#include "fedmesh/term.hpp"

namespace fedmesh {

/// Canonical cache key for a pattern: variables become positional markers
/// (?0, ?1, ...) in order of first occurrence, so alpha-equivalent patterns
/// share one key. Repeated variables keep their repetition. Ground terms
/// render in N-Triples form, which is injective.
std::string normalize_pattern(const TriplePattern& pattern);

/// Which endpoints can yield results for which patterns. Entries are
/// tri-state: absent means unknown, otherwise relevant or irrelevant.
/// Concurrent readers; atomic updates; no expiry, flush() is the only
/// invalidation.
class SelectionCache {
public:
    std::optional<bool> lookup(const TriplePattern& pattern,
                               const std::string& endpoint_id) const;
    void update(const TriplePattern& pattern, const std::string& endpoint_id,
                bool relevant);

    void flush();

    /// Number of (pattern, endpoint) entries.
    std::size_t size() const;

private:
    mutable std::shared_mutex mu_;
    std::map<std::string, std::map<std::string, bool>> entries_;
};

}  // namespace fedmesh
