#include "kgmas/rami_model.hpp"

#include <algorithm>
#include <map>

#include "kgmas/transport.hpp"
#include "kgmas/vocabulary.hpp"

namespace kgmas {

namespace v = vocabulary;

namespace {

std::vector<Term> objects(const TripleSet& g, const Term& subject, const Term& predicate) {
  std::vector<Term> out;
  for (auto it = g.lower_bound(Triple{subject, predicate, Term()});
       it != g.end() && it->subject == subject && it->predicate == predicate; ++it) {
    out.push_back(it->object);
  }
  return out;
}

std::vector<Triple> with_predicate(const TripleSet& g, const Term& predicate) {
  std::vector<Triple> out;
  for (const auto& t : g) {
    if (t.predicate == predicate) out.push_back(t);
  }
  return out;
}

std::string short_name(const Term& t) { return t.is_iri() ? local_name(t.iri().value) : t.text(); }

struct ChannelRef {
  Term asset;
  Term node;
  ChannelDirection direction;
};

std::vector<ChannelRef> channel_refs(const TripleSet& g) {
  std::vector<ChannelRef> out;
  for (const auto& t : with_predicate(g, v::publishesOn())) out.push_back({t.subject, t.object, ChannelDirection::publishes});
  for (const auto& t : with_predicate(g, v::subscribesTo())) out.push_back({t.subject, t.object, ChannelDirection::subscribes});
  return out;
}

}  // namespace

std::string to_string(Realm realm) { return realm == Realm::physical ? "physical" : "digital"; }

std::string to_string(ChannelDirection direction) {
  return direction == ChannelDirection::publishes ? "publishes" : "subscribes";
}

Realm realm_from_string(const std::string& text) {
  if (text == "physical") return Realm::physical;
  if (text == "digital") return Realm::digital;
  throw ValidationError("unknown realm '" + text + "'");
}

ChannelDirection direction_from_string(const std::string& text) {
  if (text == "publishes") return ChannelDirection::publishes;
  if (text == "subscribes") return ChannelDirection::subscribes;
  throw ValidationError("unknown channel direction '" + text + "'");
}

const Channel* AgentBlueprint::command_channel() const {
  for (const auto& c : channels) {
    if (c.direction == ChannelDirection::subscribes) return &c;
  }
  return nullptr;
}

const Channel* AgentBlueprint::state_channel() const {
  for (const auto& c : channels) {
    if (c.direction == ChannelDirection::publishes) return &c;
  }
  return nullptr;
}

bool AgentBlueprint::has_capability(const Iri& capability) const {
  return std::find(capabilities.begin(), capabilities.end(), capability) != capabilities.end();
}

std::vector<Iri> list_assets(const Snapshot& snapshot, const Iri& setup_graph) {
  std::set<Iri> assets;
  for (const auto& t : with_predicate(snapshot.graph(setup_graph), v::hasAssetKind())) assets.insert(t.subject.iri());
  return {assets.begin(), assets.end()};
}

ValidationReport validate_setup(const Snapshot& snapshot, const Iri& setup_graph,
                                const std::set<std::string>& known_schemes) {
  const auto schemes = known_schemes.empty() ? [] {
    const auto b = builtin_schemes();
    return std::set<std::string>(b.begin(), b.end());
  }()
                                             : known_schemes;
  const TripleSet& g = snapshot.graph(setup_graph);
  const auto assets = list_assets(snapshot, setup_graph);
  const std::set<Iri> asset_set(assets.begin(), assets.end());

  std::vector<Violation> out;
  auto report = [&](const Term& subject, std::string rule, std::string message) {
    out.push_back({subject.is_iri() ? subject.iri() : Iri{subject.text()}, std::move(rule), std::move(message)});
  };

  std::map<Iri, int> memberships;
  for (const auto& t : with_predicate(g, v::aggregates())) {
    if (!t.object.is_iri() || !asset_set.contains(t.object.iri())) {
      report(t.subject, "system-member-exists", "system member " + t.object.to_string() + " is not an asset");
      continue;
    }
    ++memberships[t.object.iri()];
  }

  for (const auto& a : assets) {
    const Term asset(a);
    const std::string name = local_name(a.value);

    if (objects(g, asset, v::hasAssetKind()).size() != 1) {
      report(asset, "asset-kind-unique", name + " must have exactly one asset kind");
    }

    const auto realms = objects(g, asset, v::hasRealm());
    if (realms.empty()) {
      report(asset, "realm-required", name + " has no realm");
    } else if (realms.size() > 1) {
      report(asset, "realm-unique", name + " has more than one realm");
    } else if (realms[0] != v::physical() && realms[0] != v::digital()) {
      report(asset, "realm-value", name + " realm must be kgmas:physical or kgmas:digital");
    }

    const auto protocols = objects(g, asset, v::hasProtocol());
    if (protocols.empty()) {
      report(asset, "protocol-required", name + " has no communication protocol");
    } else if (protocols.size() > 1) {
      report(asset, "protocol-unique", name + " has more than one communication protocol");
    } else if (!schemes.contains(protocols[0].text())) {
      report(asset, "protocol-recognized", name + " uses unregistered protocol '" + protocols[0].text() + "'");
    }

    const auto endpoints = objects(g, asset, v::hasEndpoint());
    if (endpoints.empty()) {
      report(asset, "endpoint-required", name + " has no endpoint");
    } else if (endpoints.size() > 1) {
      report(asset, "endpoint-unique", name + " has more than one endpoint");
    } else if (endpoints[0].text().empty()) {
      report(asset, "endpoint-nonempty", name + " has an empty endpoint");
    }

    if (objects(g, asset, v::subscribesTo()).empty()) {
      report(asset, "information-subscribes-required", name + " consumes no channel");
    }
    if (objects(g, asset, v::publishesOn()).empty()) {
      report(asset, "information-publishes-required", name + " produces no channel");
    }

    if (objects(g, asset, v::hasCapability()).empty()) {
      report(asset, "capability-required", name + " has no capability");
    }

    if (memberships[a] != 1) {
      report(asset, "system-membership", name + " must belong to exactly one system (found " +
                                            std::to_string(memberships[a]) + ")");
    }

    if (objects(g, asset, v::hasCoordinationRole()).size() != 1) {
      report(asset, "role-required", name + " must have exactly one coordination role");
    }
  }

  std::set<std::tuple<Term, std::string, ChannelDirection>> seen_channels;
  for (const auto& ref : channel_refs(g)) {
    if (!ref.asset.is_iri() || !asset_set.contains(ref.asset.iri())) {
      report(ref.asset, "channel-asset-exists", "channel " + ref.node.to_string() + " belongs to no asset");
      continue;
    }
    const auto topics = objects(g, ref.node, v::hasTopic());
    if (topics.size() != 1 || topics[0].text().empty()) {
      report(ref.asset, "channel-topic-required", "channel " + short_name(ref.node) + " needs exactly one topic");
      continue;
    }
    if (objects(g, ref.node, v::hasMessageKind()).size() != 1) {
      report(ref.asset, "channel-kind-required", "channel " + short_name(ref.node) + " needs exactly one message kind");
    }
    if (!seen_channels.insert({ref.asset, topics[0].text(), ref.direction}).second) {
      report(ref.asset, "channel-unique", "duplicate channel " + topics[0].text() + " (" + to_string(ref.direction) + ")");
    }
  }

  std::sort(out.begin(), out.end());
  return ValidationReport{std::move(out)};
}

AgentBlueprint extract_blueprint(const Snapshot& snapshot, const Iri& setup_graph, const Iri& asset_id) {
  const TripleSet& g = snapshot.graph(setup_graph);
  const Term asset(asset_id);
  const auto kinds = objects(g, asset, v::hasAssetKind());
  if (kinds.empty()) throw NotFoundError("unknown asset <" + asset_id.value + ">");

  AgentBlueprint bp;
  bp.asset_id = asset_id;

  const auto realms = objects(g, asset, v::hasRealm());
  if (kinds.size() != 1 || !kinds[0].is_iri() || realms.size() != 1) throw IncompleteBlueprintError(asset_id, "Asset");
  bp.asset_kind = kinds[0].iri();
  if (realms[0] == v::physical()) {
    bp.realm = Realm::physical;
  } else if (realms[0] == v::digital()) {
    bp.realm = Realm::digital;
  } else {
    throw IncompleteBlueprintError(asset_id, "Asset");
  }

  const auto protocols = objects(g, asset, v::hasProtocol());
  const auto endpoints = objects(g, asset, v::hasEndpoint());
  if (protocols.size() != 1 || endpoints.size() != 1 || endpoints[0].text().empty()) {
    throw IncompleteBlueprintError(asset_id, "Communication");
  }
  bp.binding = {protocols[0].text(), endpoints[0].text()};

  for (const auto& ref : channel_refs(g)) {
    if (ref.asset != asset) continue;
    const auto topics = objects(g, ref.node, v::hasTopic());
    const auto msg_kinds = objects(g, ref.node, v::hasMessageKind());
    if (topics.size() != 1 || msg_kinds.size() != 1 || !msg_kinds[0].is_iri()) {
      throw IncompleteBlueprintError(asset_id, "Information");
    }
    bp.channels.push_back({topics[0].text(), ref.direction, msg_kinds[0].iri()});
  }
  std::sort(bp.channels.begin(), bp.channels.end(), [](const Channel& a, const Channel& b) {
    return std::tie(a.topic, a.direction) < std::tie(b.topic, b.direction);
  });
  if (bp.command_channel() == nullptr || bp.state_channel() == nullptr) {
    throw IncompleteBlueprintError(asset_id, "Information");
  }

  for (const auto& c : objects(g, asset, v::hasCapability())) {
    if (c.is_iri()) bp.capabilities.push_back(c.iri());
  }
  if (bp.capabilities.empty()) throw IncompleteBlueprintError(asset_id, "Functional");

  std::vector<Iri> systems;
  for (const auto& t : with_predicate(g, v::aggregates())) {
    if (t.object == asset) systems.push_back(t.subject.iri());
  }
  if (systems.size() != 1) throw IncompleteBlueprintError(asset_id, "System");
  bp.system_id = systems[0];

  const auto roles = objects(g, asset, v::hasCoordinationRole());
  if (roles.size() != 1 || !roles[0].is_iri()) throw IncompleteBlueprintError(asset_id, "Coordination");
  bp.coordination_role = roles[0].iri();
  return bp;
}

}  // namespace kgmas
