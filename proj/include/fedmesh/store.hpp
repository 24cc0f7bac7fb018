#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "fedmesh/binding.hpp"
#include "fedmesh/term.hpp"

namespace fedmesh {

/// Indexed in-memory triple container with set semantics. Three composite
/// orderings (SPO, POS, OSP) answer every pattern shape with at least one
/// ground position by a range scan; the all-variable pattern enumerates the
/// full set, which is its answer anyway.
///
/// A store is mutated by a single writer during its load phase and is
/// immutable afterwards; concurrent readers need no coordination.
class Store {
public:
    Store() = default;

    /// Idempotent set insert; keeps all indexes consistent.
    /// Returns true when the triple was not already present.
    bool insert(const Triple& t);

    std::size_t size() const { return spo_.size(); }
    bool empty() const { return spo_.empty(); }

    bool contains(const Triple& t) const;

    /// One row per matching triple, binding exactly the pattern's variables.
    /// Repeated variables must match identical terms. Order unspecified.
    std::vector<BindingRow> match(const TriplePattern& pattern) const;

    /// True iff the pattern has at least one match; stops at the first.
    bool ask(const TriplePattern& pattern) const;

    void for_each(const std::function<void(const Triple&)>& fn) const;

    std::vector<Triple> triples() const;

    /// Set union of the member stores. Blank nodes are expected to be
    /// document-scoped already, so merging never collides them.
    static Store merge(const std::vector<const Store*>& stores);

private:
    using Id = std::uint32_t;
    using IdTriple = std::array<Id, 3>;
    static constexpr Id kNoId = 0xffffffffu;

    Id intern(const Term& t);
    // kNoId when the term has never been seen.
    Id find_id(const Term& t) const;
    const Term& term_of(Id id) const { return terms_[id]; }

    Triple to_triple(const IdTriple& spo) const;

    std::vector<Term> terms_;
    std::unordered_map<Term, Id, TermHash> ids_;
    std::set<IdTriple> spo_;
    std::set<IdTriple> pos_;
    std::set<IdTriple> osp_;
};

}  // namespace fedmesh
