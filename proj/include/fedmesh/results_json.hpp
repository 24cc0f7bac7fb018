#pragma once

#include <string>
#include <string_view>

#include "fedmesh/binding.hpp"

namespace fedmesh {

/// SPARQL 1.1 query results JSON. SELECT results carry head.vars and
/// results.bindings; ASK results carry head and boolean.
std::string serialize_results(const SolutionSeq& seq);

/// Inverse of serialize_results. Accepts "typed-literal" as an alias for
/// "literal". Throws Error on malformed documents.
SolutionSeq parse_results(std::string_view json_text);

}  // namespace fedmesh
