#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgmas/term.hpp"

namespace kgmas {

using Revision = std::uint64_t;
using TripleSet = std::set<Triple>;

/// Immutable view of every graph at one revision. Cheap to copy.
class Snapshot {
 public:
  Revision revision() const { return revision_; }

  /// Triples of a graph; empty for unknown graphs.
  const TripleSet& graph(const Iri& graph_id) const;
  bool contains(const Iri& graph_id, const Triple& t) const;

  /// Natural join of the pattern matches. Deduplicated and sorted.
  /// Throws ValidationError on an empty pattern list.
  std::vector<Solution> query(const Iri& graph_id, std::span<const Pattern> patterns) const;

 private:
  friend class TripleStore;
  Revision revision_ = 0;
  std::shared_ptr<const std::map<Iri, std::shared_ptr<const TripleSet>>> graphs_;
};

/// Named-graph triple store. Readers work on immutable snapshots; writers are
/// serialized and each successful mutation publishes a new revision.
class TripleStore {
 public:
  TripleStore();

  bool insert(const Iri& graph_id, const Triple& t);
  bool remove(const Iri& graph_id, const Triple& t);

  /// Removals then insertions, published as a single revision. A call with
  /// both lists empty leaves the revision unchanged.
  Revision atomic_update(const Iri& graph_id, std::span<const Triple> removals,
                         std::span<const Triple> insertions);

  /// Computes removals and insertions from the current graph under the
  /// writer lock and applies them as one revision (none if both are empty).
  using Mutation = std::function<void(const TripleSet& current, std::vector<Triple>& removals,
                                      std::vector<Triple>& insertions)>;
  Revision modify(const Iri& graph_id, const Mutation& mutation);

  /// Replaces every (subject, predicate, *) triple with the given objects, for
  /// each listed predicate, in one revision. Always publishes a revision.
  Revision replace_properties(const Iri& graph_id, const Term& subject,
                              const std::vector<std::pair<Term, std::vector<Term>>>& properties);

  std::vector<Solution> query(const Iri& graph_id, std::span<const Pattern> patterns) const;
  std::vector<Solution> query(const Iri& graph_id, std::initializer_list<Pattern> patterns) const {
    return query(graph_id, std::span<const Pattern>(patterns.begin(), patterns.size()));
  }

  /// Parses the Turtle subset and inserts atomically. Returns the number of
  /// distinct triples in the document. Nothing is inserted on a parse error.
  std::size_t load_turtle(const Iri& graph_id, std::string_view text);
  std::string dump_turtle(const Iri& graph_id) const;

  Snapshot snapshot() const;
  Revision revision() const;
  std::size_t size(const Iri& graph_id) const;
  bool contains(const Iri& graph_id, const Triple& t) const;

 private:
  using GraphMap = std::map<Iri, std::shared_ptr<const TripleSet>>;

  void publish(const Iri& graph_id, std::shared_ptr<const TripleSet> graph);

  mutable std::mutex read_mu_;
  std::mutex write_mu_;
  std::shared_ptr<const GraphMap> graphs_;
  Revision revision_ = 0;
};

}  // namespace kgmas
