#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgmas/acl.hpp"
#include "kgmas/error.hpp"
#include "kgmas/json.hpp"
#include "kgmas/rami_model.hpp"
#include "kgmas/triple_store.hpp"

namespace kgmas {

enum class ActionKind { send_request, perform_action, report_event, query_next };

std::string to_string(ActionKind kind);
ActionKind action_kind_from_string(const std::string& text);

/// Agent id the KG-agent registers under.
inline constexpr const char* kKgAgentId = "kg";

struct ProtocolStep {
  Iri step_id;
  int index = 0;
  Iri role;
  ActionKind kind = ActionKind::query_next;
  std::optional<Iri> target_role;
  Json content_template = Json::object();
  std::optional<Iri> capability;

  bool operator==(const ProtocolStep&) const = default;
};

struct ProtocolDefinition {
  Iri protocol_id;
  std::string task_name;
  std::vector<ProtocolStep> steps;  // steps[i].index == i + 1
  std::map<Iri, Iri> roles;         // role -> required capability

  const ProtocolStep& step(int index) const { return steps.at(static_cast<std::size_t>(index - 1)); }
  int size() const { return static_cast<int>(steps.size()); }
  bool is_kg_role(const Iri& role) const;
  /// Capability a perform_action step of `role` invokes.
  std::optional<Iri> capability_for(const ProtocolStep& step) const;

  bool operator==(const ProtocolDefinition&) const = default;
};

class ProtocolError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Reads and checks a protocol. Throws NotFoundError for an unknown id and
/// ProtocolError for a missing or duplicate step index, a dangling role or an
/// unknown capability.
ProtocolDefinition load_protocol(const Snapshot& snapshot, const Iri& setup_graph, const Iri& protocol_id);

/// Protocol serving `task_name`; throws NotFoundError when there is none.
Iri find_protocol(const Snapshot& snapshot, const Iri& setup_graph, const std::string& task_name);

/// Role -> agent id, taken from each asset's coordination role. The KG role
/// is always bound to the KG-agent.
using RoleBindings = std::map<Iri, std::string>;

enum class TaskStatus { pending, in_progress, completed, failed };

std::string to_string(TaskStatus status);
TaskStatus task_status_from_string(const std::string& text);

struct TaskState {
  std::string task_id;
  Iri protocol_id;
  std::string task_name;
  int current_step = 1;
  TaskStatus status = TaskStatus::pending;
  std::map<std::string, std::string> params;
  RoleBindings bindings;
  std::uint64_t events = 0;

  bool operator==(const TaskState&) const = default;
};

/// Values available to `{name}` placeholders: task, every parameter, and the
/// local name of every bound role.
std::map<std::string, std::string> template_variables(const TaskState& state);

/// Substitutes `{name}` in every string of `content_template`. Unknown names
/// are left untouched.
Json render(const Json& content_template, const std::map<std::string, std::string>& variables);

/// Role that may act at the current step: the executing role, or the target
/// of a step the KG performs.
std::optional<Iri> turn_owner(const ProtocolDefinition& protocol, const TaskState& state);

/// Instruction for `requester_role`: {"action": "done"} for a finished task,
/// {"action": "wait"} out of turn, else the current step's instruction. Pure.
Json kg_next_action(const ProtocolDefinition& protocol, const TaskState& state, const Iri& requester_role);

/// {"action": "perform", "capability", "params"} for the recipient's next
/// perform_action step; a refuse instruction when the incoming task does not
/// match. Pure.
Json kg_handle_request(const ProtocolDefinition& protocol, const TaskState& state, const Iri& recipient_role,
                       const Json& incoming);

class EventRejectedError : public Error {
 public:
  using Error::Error;
};

/// IRI of the task node in the data graph.
Iri task_iri(const std::string& task_id);

/// Writes an event node for the current step and advances the task in one
/// revision. Once the remaining steps are all optional queries the task
/// completes. Throws EventRejectedError (store and state untouched) when the
/// task is finished, the event names a different step, or the step expects a
/// different event.
Revision record_event(TripleStore& store, const Iri& data_graph, const ProtocolDefinition& protocol,
                      TaskState& state, const Json& event);

/// Marks the task failed at its current step.
Revision record_failure(TripleStore& store, const Iri& data_graph, TaskState& state, const std::string& reason);

/// Applies `event` to a copy of the task without touching any store; the
/// same transition record_event performs. Throws EventRejectedError.
TaskState advance(const ProtocolDefinition& protocol, const TaskState& state, const Json& event);

/// A message reduced to its performative and the roles of its endpoints.
struct MessageShape {
  Performative performative = Performative::inform;
  Iri sender_role;
  Iri receiver_role;

  auto operator<=>(const MessageShape&) const = default;
};

struct ExpectedMessage {
  int step = 0;
  MessageShape shape;

  bool operator==(const ExpectedMessage&) const = default;
};

/// Messages a successful run exchanges, derived step by step: a query is a
/// request to the KG answered by an inform (carried by the following KG step
/// when there is one); send_request is a request to the target; report_event
/// an inform to the target (the KG by default); perform_action sends nothing.
std::vector<ExpectedMessage> expected_messages(const ProtocolDefinition& protocol);
std::vector<MessageShape> expected_skeleton(const ProtocolDefinition& protocol);

/// Shape of each logged message. Agents without a role map to an IRI made of
/// their id.
std::vector<MessageShape> project_trace(const std::vector<LoggedMessage>& trace, const RoleBindings& bindings);

enum class ColocationRule { physical_colocation, physical_digital_colocation };

std::string to_string(ColocationRule rule);

struct ConsistencyViolation {
  Iri first;  // first < second
  Iri second;
  std::string position;
  ColocationRule rule = ColocationRule::physical_colocation;

  auto operator<=>(const ConsistencyViolation&) const = default;
};

/// Pairs of entities sharing an atPosition value where at least one is
/// physical. Sorted by (position, first, second).
std::vector<ConsistencyViolation> check_world_consistency(const Snapshot& snapshot, const Iri& data_graph);

}  // namespace kgmas
