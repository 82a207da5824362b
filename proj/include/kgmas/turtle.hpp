#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "kgmas/term.hpp"

namespace kgmas {

// Supported subset: @prefix declarations, one `subject predicate object .`
// statement at a time, <IRI> or prefix:local names, "literals" with optional
// ^^datatype, and # comments. No blank nodes, no ';' / ',' lists, no
// language tags.

/// Throws ParseError (with line and column) on malformed input.
std::vector<Triple> parse_turtle(std::string_view text);

/// Canonical document: the kgmas/rdf/xsd prefix block, then one statement
/// per line sorted by (subject, predicate, object).
std::string write_turtle(std::vector<Triple> triples);

}  // namespace kgmas
