#pragma once

// Random generators and brute-force oracles used by the tests. The oracles
// deliberately share no code with the library beyond the plain data types.

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "kgmas/acl.hpp"
#include "kgmas/coordination.hpp"
#include "kgmas/term.hpp"

namespace kgmas::testing {

using Rng = std::mt19937_64;

std::string fixture_path(const std::string& name);
std::string read_text(const std::string& path);

// --- triples and queries ----------------------------------------------------

/// Up to `max_triples` triples over a small vocabulary so joins hit often.
/// Literals mix datatypes, quotes, backslashes, control whitespace and UTF-8.
std::vector<Triple> random_graph(Rng& rng, std::size_t max_triples);

/// 1 to `max_patterns` patterns drawing constants from `graph` and variables
/// from a pool of four names. No pattern is all variables.
std::vector<Pattern> random_query(Rng& rng, const std::vector<Triple>& graph, int max_patterns);

/// Enumerates every assignment pattern by pattern with nested loops and keeps
/// the consistent ones. Result sorted and deduplicated.
std::vector<Solution> nested_loop_query(const std::vector<Triple>& graph, const std::vector<Pattern>& patterns);

// --- ACL ---------------------------------------------------------------------

AclMessage random_message(Rng& rng);
Json random_json(Rng& rng, int depth);

/// Content of the mover's request to the placer.
Json move_request_content();
/// Content of the placer's completion report.
Json placed_report_content();

// --- setups ------------------------------------------------------------------

/// Turtle for a valid setup with `k` assets (random kinds, realms, schemes,
/// channel counts and capabilities) in one system.
std::string random_setup(Rng& rng, int k);

// --- world consistency ---------------------------------------------------------

struct Placed {
  std::string name;
  bool physical = true;
  std::string position;
};

/// 2 to 6 entities on a small grid so collisions are common.
std::vector<Placed> random_placement(Rng& rng);
std::string placement_turtle(const std::vector<Placed>& entities);

struct OracleViolation {
  std::string first;
  std::string second;
  std::string position;
  std::string rule;

  auto operator<=>(const OracleViolation&) const = default;
};

/// Every unordered pair on the same position with at least one physical
/// member; names are full IRIs in the kgmas namespace.
std::vector<OracleViolation> pairwise_violations(const std::vector<Placed>& entities);

// --- protocol traces -------------------------------------------------------------

/// Reference projection for the move_pallet fixture, written out by hand from
/// the protocol's seven steps.
std::vector<std::tuple<std::string, std::string, std::string>> move_pallet_reference_shapes();

}  // namespace kgmas::testing
