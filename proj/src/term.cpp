#include "fedmesh/term.hpp"
#include "fedmesh/errors.hpp"

#include <cctype>
#include <cstdlib>
#include <stdexcept>

namespace fedmesh {

namespace {

bool contains_whitespace(const std::string& s) {
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return true;
    }
    return false;
}

std::size_t hash_combine(std::size_t seed, std::size_t v) {
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

Term Term::iri(std::string lexical) {
    if (lexical.empty()) throw Error("IRI lexical form must be non-empty");
    if (contains_whitespace(lexical))
        throw Error("IRI contains whitespace: " + lexical);
    Term t;
    t.kind = TermKind::Iri;
    t.lexical = std::move(lexical);
    return t;
}

Term Term::literal(std::string lexical, std::string datatype, std::string language) {
    if (!datatype.empty() && !language.empty())
        throw Error("literal has both datatype and language tag");
    Term t;
    t.kind = TermKind::Literal;
    t.lexical = std::move(lexical);
    t.datatype = std::move(datatype);
    t.language = std::move(language);
    return t;
}

Term Term::blank(std::string label) {
    if (label.empty()) throw Error("blank node label must be non-empty");
    Term t;
    t.kind = TermKind::BlankNode;
    t.lexical = std::move(label);
    return t;
}

bool is_numeric_literal(const Term& t) {
    if (!t.is_literal()) return false;
    return t.datatype == xsd::integer || t.datatype == xsd::decimal || t.datatype == xsd::dbl;
}

double numeric_value(const Term& t) {
    return std::strtod(t.lexical.c_str(), nullptr);
}

Triple::Triple(Term s, Term p, Term o)
    : subject(std::move(s)), predicate(std::move(p)), object(std::move(o)) {
    if (subject.is_literal()) throw Error("triple subject must not be a literal");
    if (!predicate.is_iri()) throw Error("triple predicate must be an IRI");
}

std::vector<std::string> TriplePattern::variables() const {
    std::vector<std::string> out;
    for (int i = 0; i < 3; ++i) {
        const TermOrVar& tv = position(i);
        if (!is_var(tv)) continue;
        const std::string& name = as_var(tv).name;
        bool seen = false;
        for (const auto& n : out) {
            if (n == name) {
                seen = true;
                break;
            }
        }
        if (!seen) out.push_back(name);
    }
    return out;
}

bool TriplePattern::ground() const {
    return !is_var(subject) && !is_var(predicate) && !is_var(object);
}

int term_order(const Term* a, const Term* b) {
    if (a == nullptr && b == nullptr) return 0;
    if (a == nullptr) return -1;
    if (b == nullptr) return 1;
    auto rank = [](TermKind k) {
        switch (k) {
            case TermKind::BlankNode: return 0;
            case TermKind::Iri: return 1;
            case TermKind::Literal: return 2;
        }
        return 3;
    };
    if (rank(a->kind) != rank(b->kind)) return rank(a->kind) < rank(b->kind) ? -1 : 1;
    if (a->kind == TermKind::Literal && is_numeric_literal(*a) && is_numeric_literal(*b)) {
        double x = numeric_value(*a), y = numeric_value(*b);
        if (x < y) return -1;
        if (x > y) return 1;
        // numerically equal: fall through to lexical tie-break for totality
    }
    int c = a->lexical.compare(b->lexical);
    if (c != 0) return c < 0 ? -1 : 1;
    c = a->datatype.compare(b->datatype);
    if (c != 0) return c < 0 ? -1 : 1;
    c = a->language.compare(b->language);
    if (c != 0) return c < 0 ? -1 : 1;
    return 0;
}

std::size_t hash_term(const Term& t) {
    std::hash<std::string> h;
    std::size_t seed = static_cast<std::size_t>(t.kind);
    seed = hash_combine(seed, h(t.lexical));
    seed = hash_combine(seed, h(t.datatype));
    seed = hash_combine(seed, h(t.language));
    return seed;
}

std::size_t TripleHash::operator()(const Triple& t) const {
    std::size_t seed = hash_term(t.subject);
    seed = hash_combine(seed, hash_term(t.predicate));
    seed = hash_combine(seed, hash_term(t.object));
    return seed;
}

}  // namespace fedmesh
