#include "kgmas/agent.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "kgmas/log.hpp"
#include "kgmas/vocabulary.hpp"

namespace kgmas {

namespace v = vocabulary;

namespace {

constexpr auto kPoll = std::chrono::milliseconds(20);
constexpr int kWaitRetries = 50;

std::string describe(const ValidationReport& report) {
  std::ostringstream os;
  os << "setup graph has " << report.violations.size() << " violation(s)";
  for (const auto& viol : report.violations) os << "\n  " << viol.rule << ": " << viol.message;
  return os.str();
}

Term capability_iri(const std::string& name) { return vocab(name); }

}  // namespace

GenerationError::GenerationError(ValidationReport report)
    : ValidationError(describe(report)), report_(std::move(report)) {}

std::string agent_id_for(const Iri& asset_id) {
  std::string id = local_name(asset_id.value);
  std::transform(id.begin(), id.end(), id.begin(), [](unsigned char c) { return std::tolower(c); });
  return id;
}

std::vector<AgentSpec> generate_agents(const Snapshot& snapshot, const Iri& setup_graph,
                                       const std::set<std::string>& known_schemes) {
  auto report = validate_setup(snapshot, setup_graph, known_schemes);
  if (!report.ok()) throw GenerationError(std::move(report));
  std::vector<AgentSpec> specs;
  std::set<std::string> ids;
  for (const auto& asset : list_assets(snapshot, setup_graph)) {
    AgentSpec spec;
    spec.agent_id = agent_id_for(asset);
    if (spec.agent_id == kKgAgentId || !ids.insert(spec.agent_id).second) {
      throw DuplicateError("agent id '" + spec.agent_id + "' is not unique");
    }
    spec.blueprint = extract_blueprint(snapshot, setup_graph, asset);
    spec.behavior = spec.blueprint.coordination_role;
    specs.push_back(std::move(spec));
  }
  return specs;
}

Json to_json(const AgentSpec& spec) {
  const auto& bp = spec.blueprint;
  Json channels = Json::array();
  for (const auto& c : bp.channels) {
    channels.push_back({{"topic", c.topic}, {"direction", to_string(c.direction)}, {"message_kind", c.message_kind.value}});
  }
  Json capabilities = Json::array();
  for (const auto& c : bp.capabilities) capabilities.push_back(c.value);
  return {{"agent_id", spec.agent_id},
          {"behavior", spec.behavior.value},
          {"blueprint",
           {{"asset_id", bp.asset_id.value},
            {"asset_kind", bp.asset_kind.value},
            {"realm", to_string(bp.realm)},
            {"binding", {{"protocol_scheme", bp.binding.protocol_scheme}, {"endpoint", bp.binding.endpoint}}},
            {"channels", channels},
            {"capabilities", capabilities},
            {"system_id", bp.system_id.value},
            {"coordination_role", bp.coordination_role.value}}}};
}

AgentSpec spec_from_json(const Json& doc) {
  try {
    AgentSpec spec;
    spec.agent_id = doc.at("agent_id").get<std::string>();
    spec.behavior = Iri{doc.at("behavior").get<std::string>()};
    const auto& b = doc.at("blueprint");
    auto& bp = spec.blueprint;
    bp.asset_id = Iri{b.at("asset_id").get<std::string>()};
    bp.asset_kind = Iri{b.at("asset_kind").get<std::string>()};
    bp.realm = realm_from_string(b.at("realm").get<std::string>());
    bp.binding = {b.at("binding").at("protocol_scheme").get<std::string>(), b.at("binding").at("endpoint").get<std::string>()};
    for (const auto& c : b.at("channels")) {
      bp.channels.push_back({c.at("topic").get<std::string>(), direction_from_string(c.at("direction").get<std::string>()),
                             Iri{c.at("message_kind").get<std::string>()}});
    }
    for (const auto& c : b.at("capabilities")) bp.capabilities.push_back(Iri{c.get<std::string>()});
    bp.system_id = Iri{b.at("system_id").get<std::string>()};
    bp.coordination_role = Iri{b.at("coordination_role").get<std::string>()};
    return spec;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed agent spec: ") + e.what());
  }
}

RoleBindings role_bindings(const std::vector<AgentSpec>& specs) {
  RoleBindings out;
  for (const auto& s : specs) out[s.behavior] = s.agent_id;
  out[v::kgRole().iri()] = kKgAgentId;
  return out;
}

std::string to_string(Lifecycle state) {
  switch (state) {
    case Lifecycle::created: return "created";
    case Lifecycle::running: return "running";
    case Lifecycle::stopped: return "stopped";
  }
  return "unknown";
}

/// Generic protocol interpreter. One thread; handles one message at a time.
class Agent {
 public:
  Agent(AgentSpec spec, const AgentContext& context)
      : spec_(std::move(spec)),
        bus_(*context.bus),
        store_(*context.store),
        data_graph_(context.data_graph),
        protocols_(context.protocols),
        bindings_(context.bindings),
        action_timeout_(context.action_timeout) {
    const auto& bp = spec_.blueprint;
    device_ = local_name(bp.asset_id.value);
    adapter_ = context.registry->resolve(bp.binding);
    connection_ = std::make_unique<Connection>(bp, device_, *context.world, context.inbox,
                                               context.registry->resolve(bp.binding));
    command_topic_ = bp.command_channel()->topic;
    state_topic_ = bp.state_channel()->topic;
    initial_observation_ = context.world->observe_device(device_);
  }

  ~Agent() { shutdown(); }

  const std::string& id() const { return spec_.agent_id; }
  Lifecycle state() const { return state_; }
  Connection& connection() { return *connection_; }

  void start() {
    bus_.register_agent(spec_.agent_id);
    try {
      connection_->attach();
      if (adapter_->supports_subscribe()) {
        state_sub_ = adapter_->subscribe(state_topic_, [this](const Json& payload) { on_state(payload); });
      }
      store_.replace_properties(data_graph_, spec_.blueprint.asset_id,
                                {{v::hasRealm(), {spec_.blueprint.realm == Realm::physical ? v::physical() : v::digital()}},
                                 {v::hasStatus(), {literal("idle")}}});
      connection_->publish_state(store_, data_graph_, initial_observation_);
      connection_->emit(initial_observation_);
    } catch (...) {
      connection_->detach();
      bus_.unregister_agent(spec_.agent_id);
      throw;
    }
    running_ = true;
    state_ = Lifecycle::running;
    thread_ = std::thread([this] { loop(); });
  }

  Revision shutdown() {
    if (state_ != Lifecycle::running) return final_revision_;
    running_ = false;
    {
      std::lock_guard lock(state_mu_);
      state_cv_.notify_all();
    }
    if (thread_.joinable()) thread_.join();
    state_sub_.reset();
    connection_->detach();
    bus_.unregister_agent(spec_.agent_id);
    final_revision_ = store_.replace_properties(data_graph_, spec_.blueprint.asset_id, {{v::hasStatus(), {literal("stopped")}}});
    state_ = Lifecycle::stopped;
    return final_revision_;
  }

 private:
  struct Engagement {
    const ProtocolDefinition* protocol = nullptr;
    std::map<std::string, std::string> vars;
    Json params = Json::object();
    int cursor = 0;  // last own step taken
    AclMessage last_query;
    int waits = 0;
    bool over = false;
  };

  void loop() {
    while (running_) {
      std::optional<AclMessage> msg;
      try {
        msg = bus_.receive(spec_.agent_id, kPoll);
      } catch (const NotFoundError&) {
        return;
      }
      if (!msg) continue;
      try {
        handle(*msg);
      } catch (const std::exception& e) {
        log::info(spec_.agent_id, ": ", e.what());
        fail(msg->conversation_id, e.what());
      }
    }
  }

  const Iri& role() const { return spec_.behavior; }

  std::map<std::string, std::string> base_vars(const std::string& task) const {
    std::map<std::string, std::string> vars;
    for (const auto& [r, agent] : bindings_) vars[local_name(r.value)] = agent;
    vars["task"] = task;
    return vars;
  }

  const ProtocolDefinition& protocol_for(const std::string& task) const {
    const auto it = protocols_.find(task);
    if (it == protocols_.end()) throw NotFoundError("no protocol for task '" + task + "'");
    return it->second;
  }

  // Next own step after the cursor, optionally of one kind.
  const ProtocolStep* next_own(const Engagement& e, std::optional<ActionKind> kind = std::nullopt) const {
    for (int i = e.cursor + 1; i <= e.protocol->size(); ++i) {
      const auto& s = e.protocol->step(i);
      if (s.role == role() && (!kind || s.kind == *kind)) return &s;
    }
    return nullptr;
  }

  std::string agent_of(const std::optional<Iri>& r) const {
    if (!r) return kKgAgentId;
    const auto it = bindings_.find(*r);
    return it == bindings_.end() ? local_name(r->value) : it->second;
  }

  AclMessage send(Performative p, const std::string& to, Json content, const std::string& conversation,
                  bool expect_reply, std::optional<std::string> in_reply_to = std::nullopt) {
    AclMessage m;
    m.performative = p;
    m.sender = spec_.agent_id;
    m.receiver = to;
    m.content = std::move(content);
    m.conversation_id = conversation;
    if (expect_reply) m.reply_with = spec_.agent_id + "-" + std::to_string(++reply_counter_);
    m.in_reply_to = std::move(in_reply_to);
    bus_.send(m);
    return m;
  }

  // Takes own steps that need no trigger, stopping at the first that awaits one.
  void proceed(const std::string& conversation, Engagement& e) {
    while (const ProtocolStep* s = next_own(e)) {
      if (s->kind == ActionKind::query_next) {
        e.cursor = s->index;
        e.last_query = send(Performative::request, kKgAgentId, render(s->content_template, e.vars), conversation, true);
        return;
      }
      if (s->kind != ActionKind::report_event) return;
      e.cursor = s->index;
      send(Performative::inform, agent_of(s->target_role.value_or(v::kgRole().iri())),
           render(s->content_template, e.vars), conversation, false);
    }
  }

  void handle(const AclMessage& msg) {
    const auto& c = msg.content;
    const std::string conv = msg.performative == Performative::request && c.contains("conversation")
                                 ? c["conversation"].get<std::string>()
                                 : msg.conversation_id;
    auto it = engagements_.find(conv);

    if (msg.performative == Performative::request && it == engagements_.end()) {
      const auto task = c.at("task").get<std::string>();
      Engagement e;
      e.protocol = &protocol_for(task);
      e.vars = base_vars(task);
      const bool kickoff = c.contains("conversation");
      const Json params = kickoff ? c.value("params", Json::object()) : c;
      for (const auto& [k, value] : params.items()) {
        if (k == "task" || !value.is_string()) continue;
        e.vars[k] = value.get<std::string>();
        e.params[k] = value;
      }
      if (!kickoff) {
        // Steps up to the request addressed to us are someone else's.
        for (int i = 1; i <= e.protocol->size(); ++i) {
          const auto& s = e.protocol->step(i);
          if (s.kind == ActionKind::send_request && s.target_role == role()) {
            e.cursor = i;
            break;
          }
        }
      }
      it = engagements_.emplace(conv, std::move(e)).first;
      proceed(conv, it->second);
      return;
    }
    if (it == engagements_.end() || it->second.over) return;
    Engagement& e = it->second;

    if (msg.performative == Performative::refuse || msg.performative == Performative::failure) {
      e.over = true;
      return;
    }
    if (msg.performative != Performative::inform || !c.contains("action")) return;

    const auto action = c["action"].get<std::string>();
    if (action == "done" || action == "abort" || action == "refuse") {
      e.over = true;
    } else if (action == "wait") {
      if (++e.waits > kWaitRetries) throw Error("gave up waiting for a turn");
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      e.last_query = send(Performative::request, kKgAgentId, e.last_query.content, conv, true);
    } else if (action == "send_request") {
      const ProtocolStep* s = next_own(e, ActionKind::send_request);
      if (!s) throw Error("instructed to send a request but no such step remains");
      if (s->capability && !invoke(local_name(s->capability->value), e.params)) {
        throw Error("capability " + local_name(s->capability->value) + " failed");
      }
      e.cursor = s->index;
      const auto to = c.value("to", agent_of(s->target_role));
      send(Performative::request, to, render(s->content_template, e.vars), conv, true);
      proceed(conv, e);
    } else if (action == "perform") {
      const ProtocolStep* s = next_own(e, ActionKind::perform_action);
      if (!s) throw Error("instructed to perform but no such step remains");
      if (!invoke(c.at("capability").get<std::string>(), c.value("params", Json::object()))) {
        throw Error("capability " + c.at("capability").get<std::string>() + " failed");
      }
      e.cursor = s->index;
      proceed(conv, e);
    } else {
      proceed(conv, e);
    }
  }

  void fail(const std::string& conversation, const std::string& reason) {
    const auto it = engagements_.find(conversation);
    if (it == engagements_.end() || it->second.over) return;
    it->second.over = true;
    try {
      send(Performative::failure, kKgAgentId, {{"error", reason}}, conversation, false);
    } catch (const std::exception&) {
    }
  }

  void set_status(const char* status) {
    store_.replace_properties(data_graph_, spec_.blueprint.asset_id, {{v::hasStatus(), {literal(status)}}});
  }

  void on_state(const Json& payload) {
    std::lock_guard lock(state_mu_);
    latest_ = payload;
    state_cv_.notify_all();
  }

  // 1: completed, -1: failed, 0: pending.
  static int outcome(const Json& state, std::uint64_t id) {
    if (!state.is_object()) return 0;
    if (state.value("rejected_command", std::uint64_t{0}) == id || state.value("failed_command", std::uint64_t{0}) == id) {
      return -1;
    }
    return state.value("completed_command", std::uint64_t{0}) >= id ? 1 : 0;
  }

  bool invoke(const std::string& capability, const Json& params) {
    if (!spec_.blueprint.has_capability(capability_iri(capability).iri())) {
      throw UnknownCapabilityError(spec_.agent_id + " has no capability " + capability);
    }
    const auto id = ++command_counter_;
    set_status("busy");
    const Json payload{{"command_id", id}, {"capability", capability}, {"params", params}};
    int result = 0;
    const auto deadline = std::chrono::steady_clock::now() + action_timeout_;
    if (adapter_->supports_subscribe()) {
      adapter_->publish(command_topic_, payload);
      std::unique_lock lock(state_mu_);
      state_cv_.wait_until(lock, deadline, [&] { return !running_ || (result = outcome(latest_, id)) != 0; });
    } else {
      const auto ack = adapter_->request(command_topic_, payload);
      result = ack.value("accepted", false) ? 0 : -1;
      while (result == 0 && running_ && std::chrono::steady_clock::now() < deadline) {
        result = outcome(adapter_->request(state_topic_, Json::object()), id);
        if (result == 0) std::this_thread::sleep_for(std::chrono::microseconds(200));
      }
    }
    set_status("idle");
    return result == 1;
  }

  AgentSpec spec_;
  MessageBus& bus_;
  TripleStore& store_;
  Iri data_graph_;
  std::map<std::string, ProtocolDefinition> protocols_;
  RoleBindings bindings_;
  std::chrono::milliseconds action_timeout_;
  std::string device_;
  std::unique_ptr<Adapter> adapter_;
  std::unique_ptr<Connection> connection_;
  std::string command_topic_;
  std::string state_topic_;
  Observation initial_observation_;
  Subscription state_sub_;

  std::mutex state_mu_;
  std::condition_variable state_cv_;
  Json latest_;

  std::map<std::string, Engagement> engagements_;
  std::uint64_t reply_counter_ = 0;
  std::uint64_t command_counter_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<Lifecycle> state_{Lifecycle::created};
  Revision final_revision_ = 0;
  std::thread thread_;
};

AgentHandle::AgentHandle(std::unique_ptr<Agent> agent) : agent_(std::move(agent)) {}
AgentHandle::~AgentHandle() = default;
AgentHandle::AgentHandle(AgentHandle&&) noexcept = default;
AgentHandle& AgentHandle::operator=(AgentHandle&&) noexcept = default;

const std::string& AgentHandle::agent_id() const { return agent_->id(); }
Lifecycle AgentHandle::state() const { return agent_->state(); }
Connection& AgentHandle::connection() { return agent_->connection(); }
Revision AgentHandle::shutdown() { return agent_->shutdown(); }

std::unique_ptr<AgentHandle> instantiate(const AgentSpec& spec, const AgentContext& context) {
  if (!context.bus || !context.store || !context.world || !context.registry || !context.inbox) {
    throw ValidationError("agent context is incomplete");
  }
  if (!context.world->has_device(local_name(spec.blueprint.asset_id.value))) {
    throw NotFoundError("world has no device for asset <" + spec.blueprint.asset_id.value + ">");
  }
  auto agent = std::make_unique<Agent>(spec, context);
  agent->start();
  return std::make_unique<AgentHandle>(std::move(agent));
}

KgAgent::KgAgent(MessageBus& bus, TripleStore& store, Iri data_graph, std::map<std::string, ProtocolDefinition> protocols)
    : bus_(bus), store_(store), data_graph_(std::move(data_graph)), protocols_(std::move(protocols)) {}

KgAgent::~KgAgent() { stop(); }

void KgAgent::start() {
  if (running_) return;
  bus_.register_agent(kKgAgentId);
  running_ = true;
  thread_ = std::thread([this] { run(); });
}

void KgAgent::stop() {
  if (!running_) return;
  running_ = false;
  if (thread_.joinable()) thread_.join();
  bus_.unregister_agent(kKgAgentId);
}

void KgAgent::begin_task(TaskState state) {
  const auto it = protocols_.find(state.task_name);
  if (it == protocols_.end()) throw NotFoundError("no protocol for task '" + state.task_name + "'");
  std::lock_guard lock(mu_);
  if (tasks_.contains(state.task_id)) throw DuplicateError("task '" + state.task_id + "' already exists");
  state.protocol_id = it->second.protocol_id;
  const auto id = state.task_id;
  tasks_.emplace(id, Tracked{std::move(state), &it->second, false});
}

TaskState KgAgent::task(const std::string& task_id) const {
  std::lock_guard lock(mu_);
  const auto it = tasks_.find(task_id);
  if (it == tasks_.end()) throw NotFoundError("unknown task '" + task_id + "'");
  return it->second.state;
}

bool KgAgent::is_finished(const Tracked& t) const {
  if (t.state.status == TaskStatus::failed) return true;
  if (t.state.status != TaskStatus::completed) return false;
  return t.done_sent || t.protocol->steps.empty() || t.protocol->steps.back().kind != ActionKind::query_next;
}

bool KgAgent::finished(const std::string& task_id) const {
  std::lock_guard lock(mu_);
  const auto it = tasks_.find(task_id);
  return it != tasks_.end() && is_finished(it->second);
}

void KgAgent::fail_task(const std::string& task_id, const std::string& reason) {
  std::lock_guard lock(mu_);
  const auto it = tasks_.find(task_id);
  if (it == tasks_.end() || is_finished(it->second)) return;
  record_failure(store_, data_graph_, it->second.state, reason);
  changed_.notify_all();
}

void KgAgent::wait_change(const std::string& task_id, const TaskState& known, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  changed_.wait_for(lock, timeout, [&] {
    const auto it = tasks_.find(task_id);
    return it == tasks_.end() || it->second.state != known || is_finished(it->second);
  });
}

void KgAgent::run() {
  while (running_) {
    std::optional<AclMessage> msg;
    try {
      msg = bus_.receive(kKgAgentId, kPoll);
    } catch (const NotFoundError&) {
      return;
    }
    if (!msg) continue;
    try {
      handle(*msg);
    } catch (const std::exception& e) {
      log::info("kg: ", e.what());
    }
  }
}

void KgAgent::reply(const AclMessage& to, Performative performative, Json content) {
  AclMessage m;
  m.performative = performative;
  m.sender = kKgAgentId;
  m.receiver = to.sender;
  m.content = std::move(content);
  m.conversation_id = to.conversation_id;
  m.in_reply_to = to.reply_with;
  bus_.send(m);
}

std::optional<int> KgAgent::match(const Tracked& t, const Iri& role, ActionKind kind) const {
  const auto& p = *t.protocol;
  if (t.state.status == TaskStatus::completed || t.state.status == TaskStatus::failed) return std::nullopt;
  for (int i = t.state.current_step; i <= p.size(); ++i) {
    const auto& s = p.step(i);
    if (s.role == role && s.kind == kind) return i;
    const bool hidden = !p.is_kg_role(s.role) &&
                        (s.kind == ActionKind::perform_action ||
                         (s.kind == ActionKind::send_request && s.target_role && !p.is_kg_role(*s.target_role)));
    if (!hidden) return std::nullopt;
  }
  return std::nullopt;
}

void KgAgent::catch_up(Tracked& t, int step, const Json& event) {
  while (t.state.current_step < step) {
    const auto& s = t.protocol->step(t.state.current_step);
    const char* name = s.kind == ActionKind::perform_action ? "action_performed" : "request_sent";
    record_event(store_, data_graph_, *t.protocol, t.state, Json{{"event", name}, {"step", s.index}});
  }
  record_event(store_, data_graph_, *t.protocol, t.state, event);
}

void KgAgent::handle(const AclMessage& msg) {
  std::lock_guard lock(mu_);
  const auto it = tasks_.find(msg.conversation_id);
  if (it == tasks_.end()) {
    if (msg.performative == Performative::request) {
      reply(msg, Performative::refuse, {{"action", "refuse"}, {"reason", "unknown conversation"}});
    }
    return;
  }
  Tracked& t = it->second;
  const auto& bindings = t.state.bindings;
  Iri role{"agent:" + msg.sender};
  for (const auto& [r, agent] : bindings) {
    if (agent == msg.sender) role = r;
  }
  const auto& c = msg.content;

  if (msg.performative == Performative::failure) {
    if (!is_finished(t)) record_failure(store_, data_graph_, t.state, c.value("error", std::string("agent failure")));
  } else if (msg.performative == Performative::request && c.contains("query")) {
    const auto query = c["query"].get<std::string>();
    if (const auto step = match(t, role, ActionKind::query_next)) catch_up(t, *step, {{"event", query}, {"step", *step}});
    Json answer = query == "handle_request" ? kg_handle_request(*t.protocol, t.state, role, c)
                                            : kg_next_action(*t.protocol, t.state, role);
    const auto action = answer.value("action", std::string());
    reply(msg, action == "refuse" ? Performative::refuse : Performative::inform, answer);
    if (action == "done") t.done_sent = true;
    if (t.state.status == TaskStatus::in_progress) {
      const auto& current = t.protocol->step(t.state.current_step);
      if (t.protocol->is_kg_role(current.role) && current.target_role == role) {
        record_event(store_, data_graph_, *t.protocol, t.state,
                     {{"event", "instruction_sent"}, {"step", t.state.current_step}});
      }
    }
  } else if (msg.performative == Performative::inform && c.contains("event")) {
    if (const auto step = match(t, role, ActionKind::report_event)) {
      catch_up(t, *step, c);
    } else {
      log::info("kg: event ", c.dump(), " from ", msg.sender, " does not fit the current step");
    }
  } else if (msg.performative == Performative::request) {
    reply(msg, Performative::refuse, {{"action", "refuse"}, {"reason", "unsupported request"}});
  }
  changed_.notify_all();
}

}  // namespace kgmas
