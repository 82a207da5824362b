#include "kgmas/connection.hpp"

#include "kgmas/log.hpp"
#include "kgmas/vocabulary.hpp"

namespace kgmas {

namespace voc = vocabulary;

namespace {

Cell station_or_throw(const WarehouseWorld& layout, const Json& params, const char* key) {
  const auto it = params.find(key);
  if (it == params.end() || !it->is_string()) throw ValidationError(std::string("parameter '") + key + "' must name a station");
  const auto cell = layout.station_cell(it->get<std::string>());
  if (!cell) throw ValidationError("unknown station '" + it->get<std::string>() + "'");
  return *cell;
}

NativeCommand make(const std::string& device, Verb verb, Json args = Json::object()) {
  return NativeCommand{device, verb, std::move(args), 0};
}

Json cell_args(Cell c) { return {{"x", c.x}, {"y", c.y}}; }

NativeCommand move_tool(const WarehouseWorld& layout, const std::string& arm, Cell target) {
  Json args = cell_args(target);
  args["angles"] = layout.pose_for(arm, target);
  return make(arm, Verb::set_joints, std::move(args));
}

std::vector<NativeCommand> translate_motion(const WarehouseWorld& layout, const std::string& device, const Json& params) {
  if (params.contains("dx") || params.contains("dy")) {
    return {make(device, Verb::set_velocity, {{"dx", params.value("dx", 0)}, {"dy", params.value("dy", 0)}})};
  }
  const Cell to = station_or_throw(layout, params, "to");
  if (!params.contains("from")) return {make(device, Verb::goto_cell, cell_args(to))};
  const Cell from = station_or_throw(layout, params, "from");
  return {make(device, Verb::goto_cell, cell_args(from)), make(device, Verb::grip),
          make(device, Verb::goto_cell, cell_args(to))};
}

std::vector<NativeCommand> translate_gripper(const WarehouseWorld& layout, const std::string& device, const Json& params) {
  const std::string op = params.value("op", std::string());
  if (op == "grip") return {make(device, Verb::grip)};
  if (op == "release") return {make(device, Verb::release)};
  if (op == "pick") return {move_tool(layout, device, station_or_throw(layout, params, "at")), make(device, Verb::grip)};
  if (op == "place") {
    return {move_tool(layout, device, station_or_throw(layout, params, "at")), make(device, Verb::release)};
  }
  if (!op.empty()) throw ValidationError("unknown gripper operation '" + op + "'");
  station_or_throw(layout, params, "from");
  return {move_tool(layout, device, station_or_throw(layout, params, "to")), make(device, Verb::grip),
          make(device, Verb::release)};
}

}  // namespace

std::vector<NativeCommand> translate(const WarehouseWorld& layout, const std::string& device,
                                     const std::string& capability, const Json& params) {
  const DeviceKind kind = layout.device_kind(device);
  if (capability == "MotionControl" && kind == DeviceKind::mobile_robot) return translate_motion(layout, device, params);
  if (capability == "GripperControl" && kind == DeviceKind::robotic_arm) return translate_gripper(layout, device, params);
  throw UnknownCapabilityError("device '" + device + "' has no capability '" + capability + "'");
}

void WorldInbox::push(CommandBatch batch) {
  std::lock_guard lock(mu_);
  batches_.push_back(std::move(batch));
}

std::vector<CommandBatch> WorldInbox::drain() {
  std::lock_guard lock(mu_);
  std::vector<CommandBatch> out(std::make_move_iterator(batches_.begin()), std::make_move_iterator(batches_.end()));
  batches_.clear();
  return out;
}

bool WorldInbox::empty() const {
  std::lock_guard lock(mu_);
  return batches_.empty();
}

Connection::Connection(AgentBlueprint blueprint, std::string device, const WarehouseWorld& layout,
                       std::shared_ptr<WorldInbox> inbox, std::unique_ptr<Adapter> adapter)
    : blueprint_(std::move(blueprint)),
      device_(std::move(device)),
      layout_(layout),
      inbox_(std::move(inbox)),
      adapter_(std::move(adapter)) {
  if (!layout_.has_device(device_)) throw NotFoundError("world has no device '" + device_ + "'");
  const Channel* command = blueprint_.command_channel();
  const Channel* state = blueprint_.state_channel();
  if (!command || !state) throw ValidationError("asset <" + blueprint_.asset_id.value + "> needs a command and a state channel");
  command_topic_ = command->topic;
  state_topic_ = state->topic;
}

Connection::~Connection() { detach(); }

void Connection::attach() {
  if (adapter_->supports_subscribe()) {
    command_sub_ = adapter_->subscribe(command_topic_, [this](const Json& payload) { on_command(payload); });
    return;
  }
  command_sub_ = adapter_->serve(command_topic_, [this](const Json& payload) { return on_command(payload); });
  state_serve_ = adapter_->serve(state_topic_, [this](const Json&) {
    std::lock_guard lock(mu_);
    return latest_;
  });
}

void Connection::detach() {
  command_sub_.reset();
  state_serve_.reset();
}

Json Connection::on_command(const Json& payload) {
  std::uint64_t id = 0;
  try {
    id = payload.at("command_id").get<std::uint64_t>();
    const auto capability = payload.at("capability").get<std::string>();
    if (!blueprint_.has_capability(Iri{std::string(kVocabNamespace) + capability})) {
      throw UnknownCapabilityError("asset lacks capability '" + capability + "'");
    }
    auto commands = translate(layout_, device_, capability, payload.value("params", Json::object()));
    for (auto& c : commands) c.command_id = id;
    inbox_->push({device_, id, std::move(commands)});
    return {{"accepted", true}, {"command_id", id}};
  } catch (const std::exception& e) {
    log::info(device_, ": command refused: ", e.what());
    Json state;
    {
      std::lock_guard lock(mu_);
      rejected_ = id;
      latest_["rejected_command"] = id;
      state = latest_;
    }
    if (adapter_->supports_subscribe()) adapter_->publish(state_topic_, state);
    return {{"accepted", false}, {"command_id", id}, {"reason", e.what()}};
  }
}

Json Connection::state_payload(const Observation& obs) const {
  Json out = obs.payload;
  out["device"] = obs.device;
  out["tick"] = obs.tick;
  out["rejected_command"] = rejected_;
  return out;
}

void Connection::emit(const Observation& obs) {
  Json state;
  {
    std::lock_guard lock(mu_);
    latest_ = state_payload(obs);
    state = latest_;
  }
  if (adapter_->supports_subscribe()) adapter_->publish(state_topic_, state);
}

void Connection::reject(std::uint64_t command_id, const Observation& current) {
  {
    std::lock_guard lock(mu_);
    rejected_ = command_id;
  }
  emit(current);
}

Revision Connection::publish_state(TripleStore& store, const Iri& data_graph, const Observation& obs) const {
  const Term subject = blueprint_.asset_id;
  const auto& p = obs.payload;
  std::vector<std::pair<Term, std::vector<Term>>> properties;
  if (p.value("kind", "") == "pose") {
    const Cell c{p.at("x").get<int>(), p.at("y").get<int>()};
    properties.push_back({voc::atPosition(), {literal(layout_.position_label(c))}});
  } else {
    const Cell base{p.at("base").at("x").get<int>(), p.at("base").at("y").get<int>()};
    properties.push_back({voc::atPosition(), {literal(layout_.position_label(base))}});
    properties.push_back({voc::hasJointStates(), {literal(canonical(p.at("joint_states")))}});
    properties.push_back({voc::hasGripper(), {literal(p.at("gripper").get<std::string>())}});
  }
  return store.replace_properties(data_graph, subject, properties);
}

Revision publish_pallets(TripleStore& store, const Iri& data_graph, const WarehouseWorld& world,
                         const Observation& obs, const std::map<std::string, Iri>& device_iris) {
  return store.modify(data_graph, [&](const TripleSet& current, std::vector<Triple>& removals,
                                      std::vector<Triple>& insertions) {
    for (const auto& [id, where] : obs.payload.at("pallets").items()) {
      const Term pallet = vocab(id);
      for (const Term& predicate : {voc::atPosition(), voc::heldBy()}) {
        for (auto it = current.lower_bound(Triple{pallet, predicate, Term()});
             it != current.end() && it->subject == pallet && it->predicate == predicate; ++it) {
          removals.push_back(*it);
        }
      }
      const Cell c{where.at("x").get<int>(), where.at("y").get<int>()};
      insertions.push_back({pallet, voc::atPosition(), literal(world.position_label(c))});
      if (where.at("held_by").is_string()) {
        const auto holder = where.at("held_by").get<std::string>();
        const auto it = device_iris.find(holder);
        insertions.push_back({pallet, voc::heldBy(), it != device_iris.end() ? Term(it->second) : vocab(holder)});
      }
    }
  });
}

}  // namespace kgmas
