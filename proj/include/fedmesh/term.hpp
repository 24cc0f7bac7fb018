#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace fedmesh {

enum class TermKind : std::uint8_t { Iri, Literal, BlankNode };

/// An RDF term: IRI, literal (with optional datatype or language tag), or
/// blank node. Two terms are equal iff kind, lexical form, datatype, and
/// language all agree.
struct Term {
    TermKind kind = TermKind::Iri;
    std::string lexical;
    std::string datatype;  // literals only; empty when absent
    std::string language;  // literals only; empty when absent

    static Term iri(std::string lexical);
    static Term literal(std::string lexical, std::string datatype = "",
                        std::string language = "");
    static Term blank(std::string label);

    bool is_iri() const { return kind == TermKind::Iri; }
    bool is_literal() const { return kind == TermKind::Literal; }
    bool is_blank() const { return kind == TermKind::BlankNode; }

    auto operator<=>(const Term&) const = default;
};

/// True when the literal's datatype is one of the XSD numeric types (or the
/// lexical form is a plain number produced by the SPARQL shorthand).
bool is_numeric_literal(const Term& t);

/// Parses the numeric value of a numeric literal. Precondition:
/// is_numeric_literal(t).
double numeric_value(const Term& t);

namespace xsd {
inline constexpr const char* integer = "http://www.w3.org/2001/XMLSchema#integer";
inline constexpr const char* decimal = "http://www.w3.org/2001/XMLSchema#decimal";
inline constexpr const char* dbl = "http://www.w3.org/2001/XMLSchema#double";
inline constexpr const char* boolean = "http://www.w3.org/2001/XMLSchema#boolean";
inline constexpr const char* string = "http://www.w3.org/2001/XMLSchema#string";
}  // namespace xsd

inline constexpr const char* rdf_type = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// One RDF statement. Subject is never a literal; predicate is always an IRI.
struct Triple {
    Term subject;
    Term predicate;
    Term object;

    Triple(Term s, Term p, Term o);

    auto operator<=>(const Triple&) const = default;
};

/// A named query variable.
struct Variable {
    std::string name;

    auto operator<=>(const Variable&) const = default;
};

using TermOrVar = std::variant<Term, Variable>;

inline bool is_var(const TermOrVar& tv) { return std::holds_alternative<Variable>(tv); }
inline const Variable& as_var(const TermOrVar& tv) { return std::get<Variable>(tv); }
inline const Term& as_term(const TermOrVar& tv) { return std::get<Term>(tv); }

/// A triple pattern: each position is a term or a variable.
struct TriplePattern {
    TermOrVar subject;
    TermOrVar predicate;
    TermOrVar object;

    TriplePattern() : subject(Variable{"s"}), predicate(Variable{"p"}), object(Variable{"o"}) {}
    TriplePattern(TermOrVar s, TermOrVar p, TermOrVar o)
        : subject(std::move(s)), predicate(std::move(p)), object(std::move(o)) {}

    /// Distinct variable names in position order (subject, predicate, object).
    std::vector<std::string> variables() const;

    bool ground() const;

    const TermOrVar& position(int i) const {
        return i == 0 ? subject : (i == 1 ? predicate : object);
    }

    auto operator<=>(const TriplePattern&) const = default;
};

/// Total order over terms used by ORDER BY and deterministic reporting:
/// unbound < blank nodes < IRIs < literals; within a kind, byte order of the
/// lexical form; numeric literals compare numerically when both are numeric.
/// Null pointers denote unbound. Returns <0, 0, >0.
int term_order(const Term* a, const Term* b);

std::size_t hash_term(const Term& t);

struct TermHash {
    std::size_t operator()(const Term& t) const { return hash_term(t); }
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const;
};

}  // namespace fedmesh
