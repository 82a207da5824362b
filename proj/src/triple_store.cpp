#include "kgmas/triple_store.hpp"

#include <algorithm>
#include <optional>

#include "kgmas/error.hpp"
#include "kgmas/turtle.hpp"

namespace kgmas {
namespace {

const TripleSet& empty_set() {
  static const TripleSet empty;
  return empty;
}

// Binds `pattern_term` against `value`, extending `binding`. False on conflict.
bool unify(const Term& pattern_term, const Term& value, Solution& binding) {
  if (!pattern_term.is_variable()) return pattern_term == value;
  const auto& name = pattern_term.variable().name;
  const auto [it, inserted] = binding.emplace(name, value);
  return inserted || it->second == value;
}

Term substitute(const Term& t, const Solution& binding) {
  if (!t.is_variable()) return t;
  const auto it = binding.find(t.variable().name);
  return it == binding.end() ? t : it->second;
}

int bound_positions(const Pattern& p, const std::set<std::string>& bound_vars) {
  int n = 0;
  for (const Term* t : {&p.subject, &p.predicate, &p.object}) {
    if (!t->is_variable() || bound_vars.contains(t->variable().name)) ++n;
  }
  return n;
}

void extend(const TripleSet& graph, const Pattern& pattern, const Solution& partial,
            std::vector<Solution>& out) {
  const Pattern ground{substitute(pattern.subject, partial), substitute(pattern.predicate, partial),
                       substitute(pattern.object, partial)};
  auto try_triple = [&](const Triple& t) {
    Solution next = partial;
    if (unify(ground.subject, t.subject, next) && unify(ground.predicate, t.predicate, next) &&
        unify(ground.object, t.object, next)) {
      out.push_back(std::move(next));
    }
  };
  if (!ground.subject.is_variable()) {
    for (auto it = graph.lower_bound(Triple{ground.subject, Term(), Term()});
         it != graph.end() && it->subject == ground.subject; ++it) {
      try_triple(*it);
    }
    return;
  }
  for (const auto& t : graph) try_triple(t);
}

void validate_pattern(const Pattern& p) {
  for (const Term* t : {&p.subject, &p.predicate, &p.object}) {
    if (t->is_variable() && t->variable().name.empty()) throw ValidationError("empty variable name");
  }
}

}  // namespace

const TripleSet& Snapshot::graph(const Iri& graph_id) const {
  if (!graphs_) return empty_set();
  const auto it = graphs_->find(graph_id);
  return it == graphs_->end() ? empty_set() : *it->second;
}

bool Snapshot::contains(const Iri& graph_id, const Triple& t) const { return graph(graph_id).contains(t); }

std::vector<Solution> Snapshot::query(const Iri& graph_id, std::span<const Pattern> patterns) const {
  if (patterns.empty()) throw ValidationError("query needs at least one pattern");
  for (const auto& p : patterns) validate_pattern(p);

  const TripleSet& g = graph(graph_id);
  if (g.empty()) return {};

  // Greedy join order: most-bound pattern first.
  std::vector<const Pattern*> remaining;
  for (const auto& p : patterns) remaining.push_back(&p);
  std::set<std::string> bound_vars;
  std::vector<Solution> partials{Solution{}};

  while (!remaining.empty() && !partials.empty()) {
    auto best = std::max_element(remaining.begin(), remaining.end(), [&](const Pattern* a, const Pattern* b) {
      return bound_positions(*a, bound_vars) < bound_positions(*b, bound_vars);
    });
    const Pattern& next = **best;
    remaining.erase(best);

    std::vector<Solution> extended;
    for (const auto& partial : partials) extend(g, next, partial, extended);
    partials = std::move(extended);
    for (const Term* t : {&next.subject, &next.predicate, &next.object}) {
      if (t->is_variable()) bound_vars.insert(t->variable().name);
    }
  }

  std::set<Solution> unique(std::make_move_iterator(partials.begin()), std::make_move_iterator(partials.end()));
  return {unique.begin(), unique.end()};
}

TripleStore::TripleStore() : graphs_(std::make_shared<const GraphMap>()) {}

Snapshot TripleStore::snapshot() const {
  std::lock_guard lock(read_mu_);
  Snapshot s;
  s.revision_ = revision_;
  s.graphs_ = graphs_;
  return s;
}

Revision TripleStore::revision() const {
  std::lock_guard lock(read_mu_);
  return revision_;
}

void TripleStore::publish(const Iri& graph_id, std::shared_ptr<const TripleSet> graph) {
  auto next = std::make_shared<GraphMap>(*graphs_);
  (*next)[graph_id] = std::move(graph);
  std::lock_guard lock(read_mu_);
  graphs_ = std::move(next);
  ++revision_;
}

bool TripleStore::insert(const Iri& graph_id, const Triple& t) {
  validate_iri(graph_id.value);
  validate_triple(t);
  std::lock_guard lock(write_mu_);
  const auto current = snapshot();
  if (current.contains(graph_id, t)) return false;
  auto next = std::make_shared<TripleSet>(current.graph(graph_id));
  next->insert(t);
  publish(graph_id, std::move(next));
  return true;
}

bool TripleStore::remove(const Iri& graph_id, const Triple& t) {
  validate_iri(graph_id.value);
  validate_triple(t);
  std::lock_guard lock(write_mu_);
  const auto current = snapshot();
  if (!current.contains(graph_id, t)) return false;
  auto next = std::make_shared<TripleSet>(current.graph(graph_id));
  next->erase(t);
  publish(graph_id, std::move(next));
  return true;
}

Revision TripleStore::atomic_update(const Iri& graph_id, std::span<const Triple> removals,
                                    std::span<const Triple> insertions) {
  for (const auto& t : removals) validate_triple(t);
  for (const auto& t : insertions) validate_triple(t);
  return modify(graph_id, [&](const TripleSet&, std::vector<Triple>& out_removals, std::vector<Triple>& out_insertions) {
    out_removals.assign(removals.begin(), removals.end());
    out_insertions.assign(insertions.begin(), insertions.end());
  });
}

Revision TripleStore::modify(const Iri& graph_id, const Mutation& mutation) {
  validate_iri(graph_id.value);
  std::lock_guard lock(write_mu_);
  const auto current = snapshot();
  std::vector<Triple> removals;
  std::vector<Triple> insertions;
  mutation(current.graph(graph_id), removals, insertions);
  for (const auto& t : removals) validate_triple(t);
  for (const auto& t : insertions) validate_triple(t);
  if (removals.empty() && insertions.empty()) return current.revision();
  auto next = std::make_shared<TripleSet>(current.graph(graph_id));
  for (const auto& t : removals) next->erase(t);
  for (const auto& t : insertions) next->insert(t);
  publish(graph_id, std::move(next));
  return current.revision() + 1;
}

Revision TripleStore::replace_properties(const Iri& graph_id, const Term& subject,
                                         const std::vector<std::pair<Term, std::vector<Term>>>& properties) {
  validate_iri(graph_id.value);
  std::vector<Triple> insertions;
  for (const auto& [predicate, objects] : properties) {
    for (const auto& o : objects) insertions.push_back({subject, predicate, o});
  }
  for (const auto& t : insertions) validate_triple(t);
  std::lock_guard lock(write_mu_);
  const auto current = snapshot();
  const TripleSet& g = current.graph(graph_id);
  auto next = std::make_shared<TripleSet>(g);
  for (const auto& [predicate, objects] : properties) {
    for (auto it = g.lower_bound(Triple{subject, predicate, Term()});
         it != g.end() && it->subject == subject && it->predicate == predicate; ++it) {
      next->erase(*it);
    }
  }
  next->insert(insertions.begin(), insertions.end());
  publish(graph_id, std::move(next));
  return current.revision() + 1;
}

std::vector<Solution> TripleStore::query(const Iri& graph_id, std::span<const Pattern> patterns) const {
  return snapshot().query(graph_id, patterns);
}

std::size_t TripleStore::load_turtle(const Iri& graph_id, std::string_view text) {
  const auto parsed = parse_turtle(text);
  const TripleSet distinct(parsed.begin(), parsed.end());
  const std::vector<Triple> batch(distinct.begin(), distinct.end());
  atomic_update(graph_id, {}, batch);
  return distinct.size();
}

std::string TripleStore::dump_turtle(const Iri& graph_id) const {
  const auto s = snapshot();
  const auto& g = s.graph(graph_id);
  return write_turtle(std::vector<Triple>(g.begin(), g.end()));
}

std::size_t TripleStore::size(const Iri& graph_id) const { return snapshot().graph(graph_id).size(); }

bool TripleStore::contains(const Iri& graph_id, const Triple& t) const { return snapshot().contains(graph_id, t); }

}  // namespace kgmas
