#include "kgmas/system.hpp"

#include "kgmas/connection.hpp"
#include "kgmas/log.hpp"
#include "kgmas/vocabulary.hpp"

namespace kgmas {

namespace v = vocabulary;

System::System(WarehouseWorld world, TransportRegistry registry)
    : world_(std::move(world)), registry_(std::move(registry)) {}

System::~System() { shutdown(); }

std::size_t System::load_setup(std::string_view turtle) { return store_.load_turtle(v::setup_graph(), turtle); }

void System::start(const std::set<std::string>& held_back) {
  if (kg_) throw Error("system already started");
  const auto snapshot = store_.snapshot();
  specs_ = generate_agents(snapshot, v::setup_graph(), registry_.schemes());
  bindings_ = role_bindings(specs_);
  for (const auto& t : snapshot.graph(v::setup_graph())) {
    if (t.predicate != v::forTask() || !t.subject.is_iri()) continue;
    auto def = load_protocol(snapshot, v::setup_graph(), t.subject.iri());
    const auto name = def.task_name;
    if (!protocols_.emplace(name, std::move(def)).second) throw DuplicateError("two protocols serve task '" + name + "'");
  }
  for (const auto& s : specs_) device_iris_[local_name(s.blueprint.asset_id.value)] = s.blueprint.asset_id;

  publish_pallets(store_, v::data_graph(), world_, world_.observe_pallets(), device_iris_);

  kg_ = std::make_unique<KgAgent>(bus_, store_, v::data_graph(), protocols_);
  kg_->start();

  AgentContext context;
  context.bus = &bus_;
  context.store = &store_;
  context.data_graph = v::data_graph();
  context.world = &world_;
  context.inbox = inbox_;
  context.registry = &registry_;
  context.protocols = protocols_;
  context.bindings = bindings_;
  for (const auto& s : specs_) {
    if (held_back.contains(s.agent_id)) continue;
    agents_[s.agent_id] = instantiate(s, context);
  }
}

AgentHandle* System::agent(const std::string& agent_id) {
  const auto it = agents_.find(agent_id);
  return it == agents_.end() ? nullptr : it->second.get();
}

void System::publish_tick(const std::vector<Observation>& observations, TaskResult& result) {
  for (const auto& obs : observations) {
    const auto iri = device_iris_.find(obs.device);
    if (iri == device_iris_.end()) continue;
    AgentHandle* handle = agent(agent_id_for(iri->second));
    if (!handle || handle->state() != Lifecycle::running) continue;
    handle->connection().publish_state(store_, v::data_graph(), obs);
    handle->connection().emit(obs);
  }
  publish_pallets(store_, v::data_graph(), world_, world_.observe_pallets(), device_iris_);
  const auto violations = check_world_consistency(store_.snapshot(), v::data_graph());
  result.violations.insert(result.violations.end(), violations.begin(), violations.end());
}

TaskResult System::run_task(const std::string& task_name, const std::map<std::string, std::string>& params,
                            std::chrono::milliseconds step_deadline) {
  if (!kg_) throw Error("system is not started");
  const auto protocol = protocols_.find(task_name);
  if (protocol == protocols_.end()) throw NotFoundError("no protocol for task '" + task_name + "'");
  if (protocol->second.steps.empty()) throw ValidationError("protocol for '" + task_name + "' has no steps");

  TaskState initial;
  initial.task_id = task_name + "-" + std::to_string(++task_counter_);
  initial.task_name = task_name;
  initial.params = params;
  initial.bindings = bindings_;
  kg_->begin_task(initial);
  const auto& id = initial.task_id;
  const auto initiator = bindings_.at(protocol->second.steps.front().role);

  TaskResult result;
  const auto check = check_world_consistency(store_.snapshot(), v::data_graph());
  result.violations.insert(result.violations.end(), check.begin(), check.end());

  using Clock = std::chrono::steady_clock;
  TaskState known = kg_->task(id);
  auto step_start = Clock::now();
  bool kicked_off = false;
  while (!kg_->finished(id)) {
    const TaskState now_state = kg_->task(id);
    if (now_state.current_step != known.current_step || now_state.status != known.status) step_start = Clock::now();
    known = now_state;
    if (Clock::now() - step_start >= step_deadline) {
      result.stalled_step = known.current_step;
      kg_->fail_task(id, "step " + std::to_string(known.current_step) + " stalled");
      break;
    }

    if (!kicked_off) {
      kicked_off = true;
      Json kickoff_params = Json::object();
      for (const auto& [k, value] : params) kickoff_params[k] = value;
      AclMessage kickoff;
      kickoff.performative = Performative::request;
      kickoff.sender = "operator";
      kickoff.receiver = initiator;
      kickoff.conversation_id = id + "/kickoff";
      kickoff.content = {{"conversation", id}, {"task", task_name}, {"params", kickoff_params}};
      try {
        bus_.send(kickoff);
      } catch (const NotFoundError& e) {
        log::info("run_task: ", e.what());
      }
    }

    for (const auto& batch : inbox_->drain()) {
      for (const auto& cmd : batch.commands) {
        if (world_.apply(cmd)) continue;
        if (AgentHandle* handle = agent(agent_id_for(device_iris_.at(batch.device)))) {
          handle->connection().reject(batch.command_id, world_.observe_device(batch.device));
        }
        break;
      }
    }

    if (world_.busy()) {
      publish_tick(world_.step(), result);
      ++result.ticks;
    } else {
      kg_->wait_change(id, known, std::chrono::milliseconds(1));
    }
  }

  result.state = kg_->task(id);
  if (result.state.status == TaskStatus::failed && !result.stalled_step) result.stalled_step = result.state.current_step;
  if (result.state.status == TaskStatus::failed) result.failure = "failed at step " + std::to_string(*result.stalled_step);
  result.trace = bus_.conversation(id);
  return result;
}

Revision System::shutdown() {
  for (auto& [id, handle] : agents_) handle->shutdown();
  if (kg_) kg_->stop();
  return store_.revision();
}

}  // namespace kgmas
