#pragma once

#include <string_view>

#include "fedmesh/ast.hpp"

namespace fedmesh {

/// Parses a SELECT or ASK query in the supported subset.
///
/// Throws QueryParseError (with 1-based line and column) on syntax errors and
/// UnsupportedFeatureError when the text uses a recognized SPARQL construct
/// outside the subset (other query forms, property paths, subqueries, BIND,
/// VALUES, SERVICE, MINUS, GRAPH, HAVING, aggregates other than COUNT, FILTER
/// functions other than regex and bound, blank nodes in patterns).
Query parse_query(std::string_view text);

}  // namespace fedmesh
