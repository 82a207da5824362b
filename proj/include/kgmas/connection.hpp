#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "kgmas/rami_model.hpp"
#include "kgmas/transport.hpp"
#include "kgmas/triple_store.hpp"
#include "kgmas/world.hpp"

namespace kgmas {

class UnknownCapabilityError : public Error {
 public:
  using Error::Error;
};

/// Maps an abstract capability invocation onto native device commands.
///
/// MotionControl (mobile robot): {to} -> goto; {from, to} -> goto, grip, goto;
/// {dx, dy} -> set_velocity. GripperControl (arm): {op: grip|release};
/// {op: pick|place, at}; {from, to} -> set_joints(to), grip, release.
/// Station labels are resolved against `layout`. Throws UnknownCapabilityError
/// when the capability does not fit the device and ValidationError on bad
/// parameters.
std::vector<NativeCommand> translate(const WarehouseWorld& layout, const std::string& device,
                                     const std::string& capability, const Json& params);

/// One batch of native commands from a single capability invocation.
struct CommandBatch {
  std::string device;
  std::uint64_t command_id = 0;
  std::vector<NativeCommand> commands;
};

/// Commands waiting for the world driver. Safe to push from any thread.
class WorldInbox {
 public:
  void push(CommandBatch batch);
  std::vector<CommandBatch> drain();
  bool empty() const;

 private:
  mutable std::mutex mu_;
  std::deque<CommandBatch> batches_;
};

/// Device-side half of an agent: receives capability invocations on the
/// asset's command channel, queues the translated commands for the world, and
/// reports what the device perceives both on the state channel and in the
/// data graph.
///
/// Command payload: {"command_id", "capability", "params"}. State payload: the
/// device observation plus "device", "tick" and "rejected_command".
class Connection {
 public:
  Connection(AgentBlueprint blueprint, std::string device, const WarehouseWorld& layout,
             std::shared_ptr<WorldInbox> inbox, std::unique_ptr<Adapter> adapter);
  ~Connection();

  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  /// Starts listening for commands (subscription or served path).
  void attach();
  void detach();

  const std::string& device() const { return device_; }
  const AgentBlueprint& blueprint() const { return blueprint_; }

  /// Replaces the device's position, joint and gripper triples in one
  /// revision.
  Revision publish_state(TripleStore& store, const Iri& data_graph, const Observation& obs) const;

  /// Sends the observation on the state channel. On request/response
  /// transports the latest state is kept for the served state path instead.
  void emit(const Observation& obs);

  /// Marks a batch refused by the world and emits the current state.
  void reject(std::uint64_t command_id, const Observation& current);

  /// Handles one command payload; returns the acknowledgement.
  Json on_command(const Json& payload);

 private:
  Json state_payload(const Observation& obs) const;

  AgentBlueprint blueprint_;
  std::string device_;
  WarehouseWorld layout_;
  std::shared_ptr<WorldInbox> inbox_;
  std::unique_ptr<Adapter> adapter_;
  std::string command_topic_;
  std::string state_topic_;
  Subscription command_sub_;
  Subscription state_serve_;

  mutable std::mutex mu_;
  Json latest_ = Json::object();
  std::uint64_t rejected_ = 0;
};

/// Writes the pallet sensing observation: one atPosition per pallet, plus
/// heldBy while a device carries it. `device_iris` maps device id to entity.
Revision publish_pallets(TripleStore& store, const Iri& data_graph, const WarehouseWorld& world,
                         const Observation& obs, const std::map<std::string, Iri>& device_iris);

}  // namespace kgmas
