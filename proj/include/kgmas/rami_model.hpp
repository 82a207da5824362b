#pragma once

#include <set>
#include <string>
#include <vector>

#include "kgmas/error.hpp"
#include "kgmas/triple_store.hpp"

namespace kgmas {

enum class Realm { physical, digital };
enum class ChannelDirection { publishes, subscribes };

std::string to_string(Realm realm);
std::string to_string(ChannelDirection direction);
Realm realm_from_string(const std::string& text);
ChannelDirection direction_from_string(const std::string& text);

struct CommunicationBinding {
  std::string protocol_scheme;
  std::string endpoint;
  auto operator<=>(const CommunicationBinding&) const = default;
};

struct Channel {
  std::string topic;
  ChannelDirection direction = ChannelDirection::publishes;
  Iri message_kind;
  auto operator<=>(const Channel&) const = default;
};

/// Join of one asset's layers plus its coordination role.
struct AgentBlueprint {
  Iri asset_id;
  Iri asset_kind;
  Realm realm = Realm::physical;
  CommunicationBinding binding;
  std::vector<Channel> channels;  // sorted by (topic, direction)
  std::vector<Iri> capabilities;  // sorted
  Iri system_id;
  Iri coordination_role;

  /// First channel the asset consumes (its command input).
  const Channel* command_channel() const;
  /// First channel the asset produces (its state output).
  const Channel* state_channel() const;
  bool has_capability(const Iri& capability) const;

  bool operator==(const AgentBlueprint&) const = default;
};

struct Violation {
  Iri subject;
  std::string rule;
  std::string message;
  auto operator<=>(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;  // sorted
  bool ok() const { return violations.empty(); }
};

/// Raised by extract_blueprint when a RAMI layer is missing or ambiguous.
class IncompleteBlueprintError : public Error {
 public:
  IncompleteBlueprintError(const Iri& asset, std::string layer)
      : Error("asset <" + asset.value + "> has an incomplete " + layer + " layer"), layer_(std::move(layer)) {}
  const std::string& layer() const { return layer_; }

 private:
  std::string layer_;
};

/// Subjects carrying an asset kind, sorted.
std::vector<Iri> list_assets(const Snapshot& snapshot, const Iri& setup_graph);

/// Checks the per-layer invariants. `known_schemes` defaults to the built-in
/// transport schemes when empty.
ValidationReport validate_setup(const Snapshot& snapshot, const Iri& setup_graph,
                                const std::set<std::string>& known_schemes = {});

/// Throws NotFoundError for an unknown asset, IncompleteBlueprintError for a
/// missing layer.
AgentBlueprint extract_blueprint(const Snapshot& snapshot, const Iri& setup_graph, const Iri& asset_id);

}  // namespace kgmas
