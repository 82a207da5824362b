#include "kgmas/coordination.hpp"

#include <algorithm>
#include <charconv>
#include <set>

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

std::set<Term> subjects_with(const TripleSet& g, const Term& predicate, const Term& object) {
  std::set<Term> out;
  for (const auto& t : g) {
    if (t.predicate == predicate && t.object == object) out.insert(t.subject);
  }
  return out;
}

std::string name_of(const Term& t) { return t.is_iri() ? local_name(t.iri().value) : t.text(); }

std::optional<int> parse_int(const std::string& text) {
  int value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
  return value;
}

bool finished(const TaskState& state) {
  return state.status == TaskStatus::completed || state.status == TaskStatus::failed;
}

Json params_json(const TaskState& state) {
  Json out = Json::object();
  for (const auto& [k, value] : state.params) out[k] = value;
  return out;
}

std::string agent_for(const TaskState& state, const std::optional<Iri>& role) {
  if (!role) return {};
  const auto it = state.bindings.find(*role);
  return it == state.bindings.end() ? local_name(role->value) : it->second;
}

Json describe(const ProtocolDefinition& protocol, const TaskState& state, const ProtocolStep& step) {
  switch (step.kind) {
    case ActionKind::send_request:
      return {{"action", "send_request"}, {"to", agent_for(state, step.target_role)}, {"task", state.task_name}};
    case ActionKind::perform_action: {
      const auto capability = protocol.capability_for(step);
      return {{"action", "perform"},
              {"capability", capability ? local_name(capability->value) : std::string()},
              {"params", params_json(state)}};
    }
    case ActionKind::report_event:
      return {{"action", "report_event"}, {"event", step.content_template.value("event", std::string())}};
    case ActionKind::query_next:
      return {{"action", "query_next"}};
  }
  return {{"action", "wait"}};
}

Json wait_instruction() { return {{"action", "wait"}}; }

}  // namespace

std::string to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::send_request: return "send_request";
    case ActionKind::perform_action: return "perform_action";
    case ActionKind::report_event: return "report_event";
    case ActionKind::query_next: return "query_next";
  }
  return "unknown";
}

ActionKind action_kind_from_string(const std::string& text) {
  for (auto k : {ActionKind::send_request, ActionKind::perform_action, ActionKind::report_event, ActionKind::query_next}) {
    if (to_string(k) == text) return k;
  }
  throw ProtocolError("unknown action kind '" + text + "'");
}

std::string to_string(TaskStatus status) {
  switch (status) {
    case TaskStatus::pending: return "pending";
    case TaskStatus::in_progress: return "in_progress";
    case TaskStatus::completed: return "completed";
    case TaskStatus::failed: return "failed";
  }
  return "unknown";
}

TaskStatus task_status_from_string(const std::string& text) {
  for (auto s : {TaskStatus::pending, TaskStatus::in_progress, TaskStatus::completed, TaskStatus::failed}) {
    if (to_string(s) == text) return s;
  }
  throw ValidationError("unknown task status '" + text + "'");
}

std::string to_string(ColocationRule rule) {
  return rule == ColocationRule::physical_colocation ? "physical_colocation" : "physical_digital_colocation";
}

bool ProtocolDefinition::is_kg_role(const Iri& role) const { return Term(role) == v::kgRole(); }

std::optional<Iri> ProtocolDefinition::capability_for(const ProtocolStep& step) const {
  if (step.capability) return step.capability;
  const auto it = roles.find(step.role);
  if (it == roles.end()) return std::nullopt;
  return it->second;
}

Iri find_protocol(const Snapshot& snapshot, const Iri& setup_graph, const std::string& task_name) {
  const auto found = subjects_with(snapshot.graph(setup_graph), v::forTask(), literal(task_name));
  for (const auto& s : found) {
    if (s.is_iri()) return s.iri();
  }
  throw NotFoundError("no protocol for task '" + task_name + "'");
}

ProtocolDefinition load_protocol(const Snapshot& snapshot, const Iri& setup_graph, const Iri& protocol_id) {
  const TripleSet& g = snapshot.graph(setup_graph);
  const Term proto(protocol_id);
  const auto tasks = objects(g, proto, v::forTask());
  const auto step_nodes = objects(g, proto, v::hasStep());
  if (tasks.empty() && step_nodes.empty()) throw NotFoundError("unknown protocol <" + protocol_id.value + ">");
  if (tasks.size() != 1 || !tasks[0].is_literal()) throw ProtocolError("protocol needs exactly one task name");

  ProtocolDefinition def;
  def.protocol_id = protocol_id;
  def.task_name = tasks[0].text();

  std::set<Term> all_capabilities;
  for (const auto& t : g) {
    if (t.predicate == v::hasCapability()) all_capabilities.insert(t.object);
  }
  // Capabilities held by assets playing `role`.
  auto role_capabilities = [&](const Iri& role) {
    std::set<Term> out;
    for (const auto& asset : subjects_with(g, v::hasCoordinationRole(), Term(role))) {
      for (const auto& c : objects(g, asset, v::hasCapability())) out.insert(c);
    }
    return out;
  };
  auto check_capability = [&](const Iri& role, const Term& capability) {
    const auto held = role_capabilities(role);
    const bool known = held.empty() ? all_capabilities.contains(capability) : held.contains(capability);
    if (!known) throw ProtocolError("unknown capability " + name_of(capability) + " for role " + local_name(role.value));
  };

  for (const auto& role : objects(g, proto, v::bindsRole())) {
    if (!role.is_iri()) throw ProtocolError("role must be an IRI");
    const auto caps = objects(g, role, v::requiresCapability());
    if (caps.size() != 1 || !caps[0].is_iri()) {
      throw ProtocolError("role " + name_of(role) + " needs exactly one required capability");
    }
    check_capability(role.iri(), caps[0]);
    def.roles[role.iri()] = caps[0].iri();
  }
  auto known_role = [&](const Term& role) {
    return role.is_iri() && (role == v::kgRole() || def.roles.contains(role.iri()));
  };

  std::map<int, ProtocolStep> by_index;
  for (const auto& node : step_nodes) {
    const std::string label = name_of(node);
    ProtocolStep step;
    if (!node.is_iri()) throw ProtocolError("step " + label + " must be an IRI");
    step.step_id = node.iri();

    const auto indexes = objects(g, node, v::stepIndex());
    if (indexes.size() != 1) throw ProtocolError("step " + label + " has no step index");
    const auto index = parse_int(indexes[0].text());
    if (!index || *index < 1) throw ProtocolError("step " + label + " has an invalid step index");
    step.index = *index;

    const auto roles = objects(g, node, v::stepRole());
    if (roles.size() != 1) throw ProtocolError("step " + std::to_string(step.index) + " needs exactly one role");
    if (!known_role(roles[0])) {
      throw ProtocolError("dangling role " + name_of(roles[0]) + " at step " + std::to_string(step.index));
    }
    step.role = roles[0].iri();

    const auto kinds = objects(g, node, v::actionKind());
    if (kinds.size() != 1) throw ProtocolError("step " + std::to_string(step.index) + " needs exactly one action kind");
    step.kind = action_kind_from_string(name_of(kinds[0]));

    const auto targets = objects(g, node, v::targetRole());
    if (targets.size() > 1) throw ProtocolError("step " + std::to_string(step.index) + " has several target roles");
    if (!targets.empty()) {
      if (!known_role(targets[0])) {
        throw ProtocolError("dangling role " + name_of(targets[0]) + " at step " + std::to_string(step.index));
      }
      step.target_role = targets[0].iri();
    }
    if (step.kind == ActionKind::send_request && !step.target_role) {
      throw ProtocolError("send_request step " + std::to_string(step.index) + " has no target role");
    }

    const auto templates = objects(g, node, v::contentTemplate());
    if (templates.size() > 1) throw ProtocolError("step " + std::to_string(step.index) + " has several templates");
    if (!templates.empty()) {
      step.content_template = Json::parse(templates[0].text(), nullptr, false);
      if (step.content_template.is_discarded() || !step.content_template.is_object()) {
        throw ProtocolError("step " + std::to_string(step.index) + " has a malformed content template");
      }
    }

    const auto caps = objects(g, node, v::requiresCapability());
    if (caps.size() > 1) throw ProtocolError("step " + std::to_string(step.index) + " requires several capabilities");
    if (!caps.empty()) {
      if (!caps[0].is_iri()) throw ProtocolError("capability at step " + std::to_string(step.index) + " must be an IRI");
      step.capability = caps[0].iri();
    }

    if (!by_index.emplace(step.index, step).second) {
      throw ProtocolError("duplicate step index " + std::to_string(step.index));
    }
  }

  for (auto& [index, step] : by_index) {
    if (def.is_kg_role(step.role)) {
      if (!step.target_role) throw ProtocolError("KG step " + std::to_string(index) + " has no target role");
    } else if (step.kind == ActionKind::perform_action || step.capability) {
      const auto capability = def.capability_for(step);
      if (!capability) throw ProtocolError("step " + std::to_string(index) + " names no capability");
      check_capability(step.role, Term(*capability));
    }
  }

  int expected = 1;
  for (auto& [index, step] : by_index) {
    if (index != expected) throw ProtocolError("missing step index " + std::to_string(expected));
    def.steps.push_back(std::move(step));
    ++expected;
  }
  if (!def.steps.empty() && def.is_kg_role(def.steps.front().role)) {
    throw ProtocolError("the first step must be taken by an agent role");
  }
  return def;
}

std::map<std::string, std::string> template_variables(const TaskState& state) {
  std::map<std::string, std::string> vars;
  for (const auto& [role, agent] : state.bindings) vars[local_name(role.value)] = agent;
  for (const auto& [k, value] : state.params) vars[k] = value;
  vars["task"] = state.task_name;
  return vars;
}

Json render(const Json& content_template, const std::map<std::string, std::string>& variables) {
  if (content_template.is_object()) {
    Json out = Json::object();
    for (const auto& [k, value] : content_template.items()) out[k] = render(value, variables);
    return out;
  }
  if (content_template.is_array()) {
    Json out = Json::array();
    for (const auto& value : content_template) out.push_back(render(value, variables));
    return out;
  }
  if (!content_template.is_string()) return content_template;
  const auto& text = content_template.get_ref<const std::string&>();
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('{', pos);
    const auto close = open == std::string::npos ? std::string::npos : text.find('}', open);
    if (close == std::string::npos) break;
    out.append(text, pos, open - pos);
    const auto name = text.substr(open + 1, close - open - 1);
    const auto it = variables.find(name);
    out += it == variables.end() ? text.substr(open, close - open + 1) : it->second;
    pos = close + 1;
  }
  out.append(text, std::min(pos, text.size()));
  return out;
}

std::optional<Iri> turn_owner(const ProtocolDefinition& protocol, const TaskState& state) {
  if (finished(state) || state.current_step < 1 || state.current_step > protocol.size()) return std::nullopt;
  const auto& step = protocol.step(state.current_step);
  if (protocol.is_kg_role(step.role)) return step.target_role;
  return step.role;
}

Json kg_next_action(const ProtocolDefinition& protocol, const TaskState& state, const Iri& requester_role) {
  if (state.status == TaskStatus::completed) return {{"action", "done"}};
  if (state.status == TaskStatus::failed) return {{"action", "abort"}};
  const auto owner = turn_owner(protocol, state);
  if (!owner || *owner != requester_role) return wait_instruction();

  const auto vars = template_variables(state);
  const auto& step = protocol.step(state.current_step);
  if (protocol.is_kg_role(step.role)) return render(step.content_template, vars);
  if (step.kind != ActionKind::query_next) return describe(protocol, state, step);

  if (state.current_step < protocol.size()) {
    const auto& next = protocol.step(state.current_step + 1);
    if (protocol.is_kg_role(next.role) && next.target_role == requester_role) return render(next.content_template, vars);
  }
  for (int i = state.current_step + 1; i <= protocol.size(); ++i) {
    if (protocol.step(i).role == requester_role) return describe(protocol, state, protocol.step(i));
  }
  return wait_instruction();
}

Json kg_handle_request(const ProtocolDefinition& protocol, const TaskState& state, const Iri& recipient_role,
                       const Json& incoming) {
  const auto task = incoming.is_object() ? incoming.value("task", std::string()) : std::string();
  if (task != state.task_name) return {{"action", "refuse"}, {"reason", "task mismatch"}};
  if (finished(state)) return {{"action", "refuse"}, {"reason", "task is " + to_string(state.status)}};
  for (int i = std::max(state.current_step, 1); i <= protocol.size(); ++i) {
    const auto& step = protocol.step(i);
    if (step.role == recipient_role && step.kind == ActionKind::perform_action) return describe(protocol, state, step);
  }
  return {{"action", "refuse"}, {"reason", "no pending action for role"}};
}

Iri task_iri(const std::string& task_id) {
  validate_iri("http://kgmas.example/task/" + task_id);
  return {"http://kgmas.example/task/" + task_id};
}

TaskState advance(const ProtocolDefinition& protocol, const TaskState& state, const Json& event) {
  if (!event.is_object() || !event.contains("event") || !event["event"].is_string()) {
    throw ValidationError("event content needs an \"event\" name");
  }
  if (finished(state)) throw EventRejectedError("task " + state.task_id + " is " + to_string(state.status));
  if (state.current_step < 1 || state.current_step > protocol.size()) {
    throw EventRejectedError("task " + state.task_id + " has no current step");
  }
  if (event.contains("step") && (!event["step"].is_number_integer() || event["step"].get<int>() != state.current_step)) {
    throw EventRejectedError("event for step " + event["step"].dump() + " but the task is at step " +
                             std::to_string(state.current_step));
  }
  const auto& step = protocol.step(state.current_step);
  const auto name = event["event"].get<std::string>();
  if (step.kind == ActionKind::report_event && step.content_template.contains("event") &&
      step.content_template["event"] != name) {
    throw EventRejectedError("step " + std::to_string(step.index) + " expects event " +
                             step.content_template["event"].dump());
  }

  TaskState next = state;
  ++next.events;
  ++next.current_step;
  next.status = TaskStatus::in_progress;
  const bool only_queries_left = std::all_of(
      protocol.steps.begin() + std::min(next.current_step - 1, protocol.size()), protocol.steps.end(),
      [](const ProtocolStep& s) { return s.kind == ActionKind::query_next; });
  if (only_queries_left) next.current_step = protocol.size() + 1;
  if (next.current_step > protocol.size()) next.status = TaskStatus::completed;
  return next;
}

namespace {

void write_task_node(const TripleSet& current, const TaskState& state, const Term& task,
                     std::vector<Triple>& removals, std::vector<Triple>& insertions) {
  for (const Term& predicate : {v::taskStatus(), v::currentStep(), v::forProtocol()}) {
    for (const auto& o : objects(current, task, predicate)) removals.push_back({task, predicate, o});
  }
  insertions.push_back({task, v::taskStatus(), literal(to_string(state.status))});
  insertions.push_back({task, v::currentStep(), integer_literal(state.current_step)});
  insertions.push_back({task, v::forProtocol(), Term(state.protocol_id)});
}

void write_event_node(const TaskState& state, const Term& task, int step, const std::string& name, const Json& content,
                      std::vector<Triple>& insertions) {
  const Term node = iri(task.iri().value + "/event/" + std::to_string(state.events));
  insertions.push_back({node, v::ofTask(), task});
  insertions.push_back({node, v::atStep(), integer_literal(step)});
  insertions.push_back({node, v::eventName(), literal(name)});
  insertions.push_back({node, v::eventContent(), literal(canonical(content))});
  insertions.push_back({node, v::logicalTime(), integer_literal(static_cast<long long>(state.events))});
}

}  // namespace

Revision record_event(TripleStore& store, const Iri& data_graph, const ProtocolDefinition& protocol,
                      TaskState& state, const Json& event) {
  TaskState next = advance(protocol, state, event);
  const Term task(task_iri(state.task_id));
  const int step = state.current_step;
  const auto revision = store.modify(data_graph, [&](const TripleSet& current, std::vector<Triple>& removals,
                                                     std::vector<Triple>& insertions) {
    write_event_node(next, task, step, event["event"].get<std::string>(), event, insertions);
    write_task_node(current, next, task, removals, insertions);
  });
  state = std::move(next);
  return revision;
}

Revision record_failure(TripleStore& store, const Iri& data_graph, TaskState& state, const std::string& reason) {
  TaskState next = state;
  next.status = TaskStatus::failed;
  ++next.events;
  const Term task(task_iri(state.task_id));
  const auto revision = store.modify(data_graph, [&](const TripleSet& current, std::vector<Triple>& removals,
                                                     std::vector<Triple>& insertions) {
    write_event_node(next, task, state.current_step, "task_failed", Json{{"reason", reason}}, insertions);
    write_task_node(current, next, task, removals, insertions);
  });
  state = std::move(next);
  return revision;
}

std::vector<ExpectedMessage> expected_messages(const ProtocolDefinition& protocol) {
  const Iri kg = v::kgRole().iri();
  std::vector<ExpectedMessage> out;
  for (int i = 1; i <= protocol.size(); ++i) {
    const auto& step = protocol.step(i);
    if (protocol.is_kg_role(step.role)) {
      out.push_back({i, {Performative::inform, kg, *step.target_role}});
      continue;
    }
    switch (step.kind) {
      case ActionKind::query_next: {
        out.push_back({i, {Performative::request, step.role, kg}});
        const bool answered_by_next = i < protocol.size() && protocol.is_kg_role(protocol.step(i + 1).role) &&
                                      protocol.step(i + 1).target_role == step.role;
        if (!answered_by_next) out.push_back({i, {Performative::inform, kg, step.role}});
        break;
      }
      case ActionKind::send_request:
        out.push_back({i, {Performative::request, step.role, *step.target_role}});
        break;
      case ActionKind::report_event:
        out.push_back({i, {Performative::inform, step.role, step.target_role.value_or(kg)}});
        break;
      case ActionKind::perform_action:
        break;
    }
  }
  return out;
}

std::vector<MessageShape> expected_skeleton(const ProtocolDefinition& protocol) {
  std::vector<MessageShape> out;
  for (const auto& m : expected_messages(protocol)) out.push_back(m.shape);
  return out;
}

std::vector<MessageShape> project_trace(const std::vector<LoggedMessage>& trace, const RoleBindings& bindings) {
  std::map<std::string, Iri> role_of;
  for (const auto& [role, agent] : bindings) role_of[agent] = role;
  role_of[kKgAgentId] = v::kgRole().iri();
  auto role = [&](const std::string& agent) {
    const auto it = role_of.find(agent);
    return it == role_of.end() ? Iri{"agent:" + agent} : it->second;
  };
  std::vector<MessageShape> out;
  for (const auto& entry : trace) {
    out.push_back({entry.message.performative, role(entry.message.sender), role(entry.message.receiver)});
  }
  return out;
}

std::vector<ConsistencyViolation> check_world_consistency(const Snapshot& snapshot, const Iri& data_graph) {
  const TripleSet& g = snapshot.graph(data_graph);
  std::map<Iri, Realm> realms;
  std::map<std::string, std::set<Iri>> by_position;
  for (const auto& t : g) {
    if (!t.subject.is_iri()) continue;
    if (t.predicate == v::hasRealm()) {
      if (t.object == v::physical()) realms[t.subject.iri()] = Realm::physical;
      if (t.object == v::digital()) realms[t.subject.iri()] = Realm::digital;
    }
  }
  for (const auto& t : g) {
    if (t.predicate == v::atPosition() && t.subject.is_iri() && realms.contains(t.subject.iri())) {
      by_position[t.object.text()].insert(t.subject.iri());
    }
  }
  std::vector<ConsistencyViolation> out;
  for (const auto& [position, entities] : by_position) {
    const std::vector<Iri> list(entities.begin(), entities.end());
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        const int physical = (realms[list[i]] == Realm::physical) + (realms[list[j]] == Realm::physical);
        if (physical == 0) continue;
        out.push_back({list[i], list[j], position,
                       physical == 2 ? ColocationRule::physical_colocation : ColocationRule::physical_digital_colocation});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const ConsistencyViolation& a, const ConsistencyViolation& b) {
    return std::tie(a.position, a.first, a.second) < std::tie(b.position, b.first, b.second);
  });
  return out;
}

}  // namespace kgmas
