#pragma once

#include <string>
#include <vector>

#include "fedmesh/ast.hpp"

namespace fedmesh {

/// SPARQL surface form of a term (<iri>, "literal"@lang, "literal"^^<dt>,
/// _:label). Numeric literals whose lexical form self-describes the datatype
/// render bare.
std::string term_text(const Term& t);

std::string slot_text(const TermOrVar& tv);

/// "subject predicate object" without the trailing dot.
std::string pattern_text(const TriplePattern& p);

std::string expr_text(const Expr& e);

/// SELECT * over the given patterns and optional filters, for dispatch to a
/// single endpoint.
std::string select_subquery(const std::vector<TriplePattern>& patterns,
                            const std::vector<ExprPtr>& filters = {});

/// ASK over one pattern, for source selection probes.
std::string ask_subquery(const TriplePattern& p);

}  // namespace fedmesh
