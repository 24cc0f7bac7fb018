#include "fedmesh/cache.hpp"

#include <vector>

#include "fedmesh/ntriples.hpp"

#include <mutex>

namespace fedmesh {

std::string normalize_pattern(const TriplePattern& pattern) {
    std::vector<std::string> seen;
    std::string out;
    for (int i = 0; i < 3; ++i) {
        if (i > 0) out += ' ';
        const TermOrVar& slot = pattern.position(i);
        if (is_var(slot)) {
            const std::string& name = as_var(slot).name;
            std::size_t index = 0;
            while (index < seen.size() && seen[index] != name) ++index;
            if (index == seen.size()) seen.push_back(name);
            out += '?';
            out += std::to_string(index);
        } else {
            out += serialize_term_nt(as_term(slot));
        }
    }
    return out;
}

std::optional<bool> SelectionCache::lookup(const TriplePattern& pattern,
                                           const std::string& endpoint_id) const {
    const std::string key = normalize_pattern(pattern);
    std::shared_lock lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    auto inner = it->second.find(endpoint_id);
    if (inner == it->second.end()) return std::nullopt;
    return inner->second;
}

void SelectionCache::update(const TriplePattern& pattern, const std::string& endpoint_id,
                            bool relevant) {
    const std::string key = normalize_pattern(pattern);
    std::unique_lock lock(mu_);
    entries_[key][endpoint_id] = relevant;
}

void SelectionCache::flush() {
    std::unique_lock lock(mu_);
    entries_.clear();
}

std::size_t SelectionCache::size() const {
    std::shared_lock lock(mu_);
    std::size_t n = 0;
    for (const auto& [key, per_endpoint] : entries_) n += per_endpoint.size();
    return n;
}

}  // namespace fedmesh
