#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedmesh/errors.hpp"
#include "fedmesh/store.hpp"
#include "fedmesh/term.hpp"

namespace fedmesh {

/// Parses N-Triples text, one statement per line terminated by ".".
/// Comment lines ("#") and blank lines are skipped. Stops at the first
/// malformed line with an NtParseError carrying the line number.
///
/// When doc_id is non-empty, blank node labels become "<doc_id>.<label>" so
/// that stores loaded from different documents never collide blank nodes.
std::vector<Triple> parse_ntriples(std::string_view input, const std::string& doc_id = "");

/// Reads and parses a file; doc_id defaults to the file stem.
std::vector<Triple> parse_ntriples_file(const std::filesystem::path& path);
std::vector<Triple> parse_ntriples_file(const std::filesystem::path& path,
                                        const std::string& doc_id);

/// Loads a file into a store, returning the number of statements read
/// (which may exceed the store growth when the file repeats triples).
std::size_t load_ntriples_file(Store& store, const std::filesystem::path& path);

std::string serialize_term_nt(const Term& t);
std::string serialize_triple_nt(const Triple& t);
std::string serialize_ntriples(std::span<const Triple> triples);

}  // namespace fedmesh
