#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fedmesh/endpoint.hpp"
#include "fedmesh/store.hpp"

namespace fedmesh {

/// Parameters for the synthetic life-sciences federation generator.
///
/// Members cycle through five data roles: gene catalog, protein catalog,
/// interaction network, drug bank, and disease annotations. Entity content
/// is a pure function of (seed, role, entity), so the union of all members
/// carries the same domain triples for every member count and placement
/// mode; only the partitioning changes.
struct FixtureSpec {
    std::uint64_t seed = 1;
    std::size_t members = 29;
    /// Disjoint placement assigns each entity to exactly one member of its
    /// role. Overlap placement additionally copies the entity's triples to
    /// the next member of the same role, so same-role members share data.
    bool overlap = false;
    /// Every member is padded with join-free noise triples (predicates no
    /// domain query touches, member-unique subjects) up to this size.
    std::size_t min_member_triples = 5000;
};

/// A generated federation: one store per member, ids "m00", "m01", ...
struct Fixtures {
    FixtureSpec spec;
    std::vector<std::string> member_ids;
    std::vector<Store> stores;

    /// Set union of all member stores (the centralized-evaluation oracle).
    Store merged_store() const;

    /// Fresh in-process federation over copies of the member stores, every
    /// member carrying the same latency spec.
    Federation make_federation(LatencySpec latency = {}) const;
};

Fixtures generate_fixtures(const FixtureSpec& spec);

/// Writes one N-Triples file per member, a federation config
/// (federation.json) pointing at them, and manifest.json with per-member
/// triple counts. When corpus_dir is non-empty, the manifest also records
/// the expected row count of every corpus query against the merged store.
void write_fixtures(const Fixtures& fx, const std::filesystem::path& out_dir,
                    const std::filesystem::path& corpus_dir = {});

}  // namespace fedmesh
