#include "fedmesh/store.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace fedmesh {

bool rows_compatible(const BindingRow& a, const BindingRow& b) {
    // Iterate the smaller row.
    const BindingRow& small = a.size() <= b.size() ? a : b;
    const BindingRow& large = a.size() <= b.size() ? b : a;
    for (const auto& [var, term] : small) {
        const Term* other = large.get(var);
        if (other != nullptr && *other != term) return false;
    }
    return true;
}

BindingRow merge_rows(const BindingRow& a, const BindingRow& b) {
    BindingRow out = a;
    for (const auto& [var, term] : b) out.set(var, term);
    return out;
}

Store::Id Store::intern(const Term& t) {
    auto it = ids_.find(t);
    if (it != ids_.end()) return it->second;
    if (terms_.size() >= std::numeric_limits<Id>::max() - 1)
        throw std::length_error("term table full");
    Id id = static_cast<Id>(terms_.size());
    terms_.push_back(t);
    ids_.emplace(t, id);
    return id;
}

Store::Id Store::find_id(const Term& t) const {
    auto it = ids_.find(t);
    return it == ids_.end() ? kNoId : it->second;
}

bool Store::insert(const Triple& t) {
    Id s = intern(t.subject);
    Id p = intern(t.predicate);
    Id o = intern(t.object);
    auto [it, inserted] = spo_.insert({s, p, o});
    if (!inserted) return false;
    pos_.insert({p, o, s});
    osp_.insert({o, s, p});
    return true;
}

bool Store::contains(const Triple& t) const {
    Id s = find_id(t.subject), p = find_id(t.predicate), o = find_id(t.object);
    if (s == kNoId || p == kNoId || o == kNoId) return false;
    return spo_.count({s, p, o}) > 0;
}

Triple Store::to_triple(const IdTriple& spo) const {
    return Triple(term_of(spo[0]), term_of(spo[1]), term_of(spo[2]));
}

void Store::for_each(const std::function<void(const Triple&)>& fn) const {
    for (const IdTriple& t : spo_) fn(to_triple(t));
}

std::vector<Triple> Store::triples() const {
    std::vector<Triple> out;
    out.reserve(spo_.size());
    for (const IdTriple& t : spo_) out.push_back(to_triple(t));
    return out;
}

Store Store::merge(const std::vector<const Store*>& stores) {
    Store out;
    for (const Store* s : stores) {
        if (s == nullptr) continue;
        for (const IdTriple& t : s->spo_) out.insert(s->to_triple(t));
    }
    return out;
}

std::vector<BindingRow> Store::match(const TriplePattern& pattern) const {
    std::vector<BindingRow> out;

    Id ids[3];
    bool ground[3];
    for (int i = 0; i < 3; ++i) {
        const TermOrVar& tv = pattern.position(i);
        ground[i] = !is_var(tv);
        if (ground[i]) {
            ids[i] = find_id(as_term(tv));
            if (ids[i] == kNoId) return out;  // ground term absent: no matches
        } else {
            ids[i] = kNoId;
        }
    }

    // Variable positions, with repeated variables noted for consistency checks.
    struct VarPos {
        int pos;
        std::string name;
    };
    std::vector<VarPos> vars;
    for (int i = 0; i < 3; ++i) {
        if (!ground[i]) vars.push_back({i, as_var(pattern.position(i)).name});
    }

    auto emit = [&](const IdTriple& spo) {
        // Repeated variables must bind the same id across positions.
        for (std::size_t i = 0; i < vars.size(); ++i) {
            for (std::size_t j = i + 1; j < vars.size(); ++j) {
                if (vars[i].name == vars[j].name && spo[vars[i].pos] != spo[vars[j].pos])
                    return;
            }
        }
        BindingRow row;
        for (const VarPos& v : vars) row.set(v.name, term_of(spo[v.pos]));
        out.push_back(std::move(row));
    };

    const Id S = ground[0] ? ids[0] : 0;
    const Id P = ground[1] ? ids[1] : 0;
    const Id O = ground[2] ? ids[2] : 0;

    auto scan = [&](const std::set<IdTriple>& index, IdTriple lo, IdTriple hi,
                    auto reorder) {
        for (auto it = index.lower_bound(lo); it != index.end() && *it <= hi; ++it)
            emit(reorder(*it));
    };

    const Id MAX = kNoId;
    if (ground[0] && ground[1]) {
        scan(spo_, {S, P, ground[2] ? O : 0}, {S, P, ground[2] ? O : MAX},
             [](IdTriple t) { return t; });
    } else if (ground[0] && ground[2]) {
        scan(osp_, {O, S, 0}, {O, S, MAX},
             [](IdTriple t) { return IdTriple{t[1], t[2], t[0]}; });
    } else if (ground[0]) {
        scan(spo_, {S, 0, 0}, {S, MAX, MAX}, [](IdTriple t) { return t; });
    } else if (ground[1]) {
        scan(pos_, {P, ground[2] ? O : 0, 0}, {P, ground[2] ? O : MAX, MAX},
             [](IdTriple t) { return IdTriple{t[2], t[0], t[1]}; });
    } else if (ground[2]) {
        scan(osp_, {O, 0, 0}, {O, MAX, MAX},
             [](IdTriple t) { return IdTriple{t[1], t[2], t[0]}; });
    } else {
        for (const IdTriple& t : spo_) emit(t);
    }
    return out;
}

bool Store::ask(const TriplePattern& pattern) const {
    // Same access paths as match but stops at the first consistent hit.
    Id ids[3];
    bool ground[3];
    for (int i = 0; i < 3; ++i) {
        const TermOrVar& tv = pattern.position(i);
        ground[i] = !is_var(tv);
        if (ground[i]) {
            ids[i] = find_id(as_term(tv));
            if (ids[i] == kNoId) return false;
        } else {
            ids[i] = kNoId;
        }
    }

    struct VarPos {
        int pos;
        std::string name;
    };
    std::vector<VarPos> vars;
    for (int i = 0; i < 3; ++i) {
        if (!ground[i]) vars.push_back({i, as_var(pattern.position(i)).name});
    }

    auto consistent = [&](const IdTriple& spo) {
        for (std::size_t i = 0; i < vars.size(); ++i) {
            for (std::size_t j = i + 1; j < vars.size(); ++j) {
                if (vars[i].name == vars[j].name && spo[vars[i].pos] != spo[vars[j].pos])
                    return false;
            }
        }
        return true;
    };

    const Id S = ground[0] ? ids[0] : 0;
    const Id P = ground[1] ? ids[1] : 0;
    const Id O = ground[2] ? ids[2] : 0;
    const Id MAX = kNoId;

    auto scan = [&](const std::set<IdTriple>& index, IdTriple lo, IdTriple hi,
                    auto reorder) {
        for (auto it = index.lower_bound(lo); it != index.end() && *it <= hi; ++it) {
            if (consistent(reorder(*it))) return true;
        }
        return false;
    };

    if (ground[0] && ground[1]) {
        return scan(spo_, {S, P, ground[2] ? O : 0}, {S, P, ground[2] ? O : MAX},
                    [](IdTriple t) { return t; });
    }
    if (ground[0] && ground[2]) {
        return scan(osp_, {O, S, 0}, {O, S, MAX},
                    [](IdTriple t) { return IdTriple{t[1], t[2], t[0]}; });
    }
    if (ground[0]) return scan(spo_, {S, 0, 0}, {S, MAX, MAX}, [](IdTriple t) { return t; });
    if (ground[1]) {
        return scan(pos_, {P, ground[2] ? O : 0, 0}, {P, ground[2] ? O : MAX, MAX},
                    [](IdTriple t) { return IdTriple{t[2], t[0], t[1]}; });
    }
    if (ground[2]) {
        return scan(osp_, {O, 0, 0}, {O, MAX, MAX},
                    [](IdTriple t) { return IdTriple{t[1], t[2], t[0]}; });
    }
    for (const IdTriple& t : spo_) {
        if (consistent(t)) return true;
    }
    return false;
}

}  // namespace fedmesh
