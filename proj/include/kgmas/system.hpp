#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kgmas/acl.hpp"
#include "kgmas/agent.hpp"
#include "kgmas/coordination.hpp"
#include "kgmas/transport.hpp"
#include "kgmas/triple_store.hpp"
#include "kgmas/world.hpp"

namespace kgmas {

struct TaskResult {
  TaskState state;
  std::vector<LoggedMessage> trace;  // the task's conversation
  std::optional<int> stalled_step;
  std::string failure;
  std::vector<ConsistencyViolation> violations;  // over every published tick
  std::uint64_t ticks = 0;

  bool completed() const { return state.status == TaskStatus::completed; }
};

/// Composition root: stores, bus, transports, world, agents and the KG-agent.
/// The world driver runs on the thread calling run_task; agents run on their
/// own threads.
class System {
 public:
  System(WarehouseWorld world, TransportRegistry registry = TransportRegistry());
  ~System();

  System(const System&) = delete;
  System& operator=(const System&) = delete;

  TripleStore& store() { return store_; }
  MessageBus& bus() { return bus_; }
  const WarehouseWorld& world() const { return world_; }
  TransportRegistry& registry() { return registry_; }
  const std::vector<AgentSpec>& specs() const { return specs_; }
  const RoleBindings& bindings() const { return bindings_; }
  const std::map<std::string, ProtocolDefinition>& protocols() const { return protocols_; }

  std::size_t load_setup(std::string_view turtle);

  /// Generates the agents, loads every protocol of the setup graph, writes the
  /// initial pallet state and starts the KG-agent plus every agent not listed
  /// in `held_back`.
  void start(const std::set<std::string>& held_back = {});

  AgentHandle* agent(const std::string& agent_id);

  /// Runs one task to completion, failure or a stalled step. A step stalls
  /// when the task makes no progress for `step_deadline`.
  TaskResult run_task(const std::string& task_name, const std::map<std::string, std::string>& params,
                      std::chrono::milliseconds step_deadline = std::chrono::milliseconds(2000));

  /// Shuts every agent down, then the KG-agent. Returns the final revision.
  Revision shutdown();

 private:
  void publish_tick(const std::vector<Observation>& observations, TaskResult& result);

  TripleStore store_;
  MessageBus bus_;
  WarehouseWorld world_;
  TransportRegistry registry_;
  std::shared_ptr<WorldInbox> inbox_ = std::make_shared<WorldInbox>();
  std::vector<AgentSpec> specs_;
  RoleBindings bindings_;
  std::map<std::string, ProtocolDefinition> protocols_;
  std::map<std::string, Iri> device_iris_;
  std::unique_ptr<KgAgent> kg_;
  std::map<std::string, std::unique_ptr<AgentHandle>> agents_;
  std::uint64_t task_counter_ = 0;
};

}  // namespace kgmas
