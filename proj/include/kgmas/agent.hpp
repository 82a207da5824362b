#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "kgmas/acl.hpp"
#include "kgmas/connection.hpp"
#include "kgmas/coordination.hpp"
#include "kgmas/rami_model.hpp"
#include "kgmas/transport.hpp"
#include "kgmas/triple_store.hpp"
#include "kgmas/world.hpp"

namespace kgmas {

struct AgentSpec {
  std::string agent_id;
  AgentBlueprint blueprint;
  Iri behavior;  // coordination role the agent plays

  bool operator==(const AgentSpec&) const = default;
};

/// The setup graph failed validation; carries the report.
class GenerationError : public ValidationError {
 public:
  explicit GenerationError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Lowercased local name of the asset IRI.
std::string agent_id_for(const Iri& asset_id);

/// One spec per asset, in asset order. Throws GenerationError when the setup
/// graph is invalid and DuplicateError when two assets map to one id.
std::vector<AgentSpec> generate_agents(const Snapshot& snapshot, const Iri& setup_graph,
                                       const std::set<std::string>& known_schemes = {});

Json to_json(const AgentSpec& spec);
/// Throws ValidationError on a malformed document.
AgentSpec spec_from_json(const Json& doc);

/// Role -> agent id for the given specs, plus the KG role.
RoleBindings role_bindings(const std::vector<AgentSpec>& specs);

enum class Lifecycle { created, running, stopped };

std::string to_string(Lifecycle state);

/// What a running agent is wired to. Pointers must outlive the agent.
struct AgentContext {
  MessageBus* bus = nullptr;
  TripleStore* store = nullptr;
  Iri data_graph;
  const WarehouseWorld* world = nullptr;  // read once at start-up
  std::shared_ptr<WorldInbox> inbox;
  const TransportRegistry* registry = nullptr;
  std::map<std::string, ProtocolDefinition> protocols;  // by task name
  RoleBindings bindings;
  std::chrono::milliseconds action_timeout{10000};
};

class Agent;

/// A running generated agent. Destroying the handle shuts the agent down.
class AgentHandle {
 public:
  explicit AgentHandle(std::unique_ptr<Agent> agent);
  ~AgentHandle();
  AgentHandle(AgentHandle&&) noexcept;
  AgentHandle& operator=(AgentHandle&&) noexcept;

  const std::string& agent_id() const;
  Lifecycle state() const;
  Connection& connection();

  /// Stops the agent and marks it stopped in the data graph. Later calls
  /// return the same revision.
  Revision shutdown();

 private:
  std::unique_ptr<Agent> agent_;
};

/// Wires a generic agent for `spec` and starts it: transport adapters for the
/// agent and its connection component, bus registration, and the initial
/// realm, status and position triples. Throws NotFoundError for an unknown
/// protocol scheme or device, DuplicateError for a taken agent id.
std::unique_ptr<AgentHandle> instantiate(const AgentSpec& spec, const AgentContext& context);

inline Revision shutdown(AgentHandle& handle) { return handle.shutdown(); }

/// The knowledge graph's seat on the bus. Answers next_action and
/// handle_request queries from its protocols, records protocol progress in
/// the data graph and tracks each conversation's task.
class KgAgent {
 public:
  KgAgent(MessageBus& bus, TripleStore& store, Iri data_graph, std::map<std::string, ProtocolDefinition> protocols);
  ~KgAgent();

  void start();
  void stop();

  /// Opens a task; messages of `state.task_id` conversation drive it.
  void begin_task(TaskState state);
  TaskState task(const std::string& task_id) const;
  /// Completed (and, when the protocol ends with a query, answered) or failed.
  bool finished(const std::string& task_id) const;
  /// Fails the task at its current step unless it already finished.
  void fail_task(const std::string& task_id, const std::string& reason);
  /// Waits until the task's step or status changes, or the timeout expires.
  void wait_change(const std::string& task_id, const TaskState& known, std::chrono::milliseconds timeout) const;

 private:
  struct Tracked {
    TaskState state;
    const ProtocolDefinition* protocol = nullptr;
    bool done_sent = false;
  };

  void run();
  void handle(const AclMessage& msg);
  void reply(const AclMessage& to, Performative performative, Json content);
  // Records the steps the KG could not see up to `step`, then `step` itself.
  void catch_up(Tracked& t, int step, const Json& event);
  std::optional<int> match(const Tracked& t, const Iri& role, ActionKind kind) const;
  bool is_finished(const Tracked& t) const;

  MessageBus& bus_;
  TripleStore& store_;
  Iri data_graph_;
  std::map<std::string, ProtocolDefinition> protocols_;
  mutable std::mutex mu_;
  mutable std::condition_variable changed_;
  std::map<std::string, Tracked> tasks_;
  std::atomic<bool> running_{false};
  std::thread thread_;
};

}  // namespace kgmas
