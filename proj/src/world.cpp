#include "kgmas/world.hpp"

#include <algorithm>
#include <cmath>

#include "kgmas/error.hpp"

namespace kgmas {

namespace {

Cell cell_from_json(const Json& j) {
  if (j.is_array() && j.size() == 2) return {j[0].get<int>(), j[1].get<int>()};
  if (j.is_object()) return {j.at("x").get<int>(), j.at("y").get<int>()};
  throw ValidationError("cell must be [x, y] or {\"x\":..,\"y\":..}, got " + j.dump());
}

Json cell_json(Cell c) { return {{"x", c.x}, {"y", c.y}}; }

int sign(int v) { return (v > 0) - (v < 0); }

int heading_for(int dx, int dy) {
  if (dx > 0) return 0;
  if (dy > 0) return 90;
  if (dx < 0) return 180;
  return 270;
}

Json optional_json(const std::optional<std::string>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::string to_string(Cell c) { return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"; }

std::string to_string(Verb verb) {
  switch (verb) {
    case Verb::set_velocity: return "set_velocity";
    case Verb::goto_cell: return "goto_cell";
    case Verb::set_joints: return "set_joints";
    case Verb::grip: return "grip";
    case Verb::release: return "release";
  }
  return "unknown";
}

Verb verb_from_string(const std::string& text) {
  for (Verb v : {Verb::set_velocity, Verb::goto_cell, Verb::set_joints, Verb::grip, Verb::release}) {
    if (to_string(v) == text) return v;
  }
  throw ValidationError("unknown verb '" + text + "'");
}

WarehouseWorld WarehouseWorld::from_json(const Json& doc) {
  WarehouseWorld w;
  try {
    w.width_ = doc.at("grid").at("width").get<int>();
    w.height_ = doc.at("grid").at("height").get<int>();
    w.seed_ = doc.value("seed", std::uint64_t{0});
    if (w.width_ <= 0 || w.height_ <= 0) throw ValidationError("grid dimensions must be positive");

    std::set<Cell> station_cells;
    for (const auto& [label, cell_doc] : doc.at("stations").items()) {
      const Cell c = cell_from_json(cell_doc);
      if (!w.in_grid(c)) throw ValidationError("station " + label + " lies outside the grid");
      if (!station_cells.insert(c).second) throw ValidationError("station " + label + " shares a cell");
      w.stations_[label] = c;
    }

    const Json pallets = doc.value("pallets", Json::object());
    for (const auto& [id, where] : pallets.items()) {
      Cell c;
      if (where.is_string()) {
        const auto s = w.station_cell(where.get<std::string>());
        if (!s) throw ValidationError("pallet " + id + " placed at unknown station");
        c = *s;
      } else {
        c = cell_from_json(where);
      }
      if (!w.in_grid(c)) throw ValidationError("pallet " + id + " lies outside the grid");
      w.pallets_[id] = PalletLocation{c, std::nullopt};
    }

    for (const auto& d : doc.at("devices")) {
      const auto id = d.at("id").get<std::string>();
      const auto kind = d.at("kind").get<std::string>();
      if (w.has_device(id)) throw ValidationError("duplicate device " + id);
      if (kind == "mobile_robot") {
        MobileRobotSim r;
        r.id = id;
        r.cell = cell_from_json(d.at("cell"));
        r.heading = d.value("heading", 0);
        if (!w.in_grid(r.cell)) throw ValidationError("robot " + id + " starts outside the grid");
        w.robots_[id] = r;
      } else if (kind == "robotic_arm") {
        RoboticArmSim a;
        a.id = id;
        a.base = cell_from_json(d.at("base"));
        for (const auto& rc : d.at("reach")) a.reach.insert(cell_from_json(rc));
        a.tool_cell = d.contains("tool_cell") ? cell_from_json(d.at("tool_cell")) : a.base;
        if (d.contains("joints")) {
          const auto joints = d.at("joints").get<std::vector<double>>();
          if (joints.size() != kJointCount) throw ValidationError("arm " + id + " needs 4 joint angles");
          std::copy(joints.begin(), joints.end(), a.joints.begin());
        }
        if (!w.in_grid(a.base)) throw ValidationError("arm " + id + " base lies outside the grid");
        for (const auto& rc : a.reach) {
          if (!w.in_grid(rc)) throw ValidationError("arm " + id + " reach lies outside the grid");
        }
        w.arms_[id] = a;
      } else {
        throw ValidationError("unknown device kind '" + kind + "'");
      }
      w.states_[id];
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed world document: ") + e.what());
  }
  return w;
}

bool WarehouseWorld::in_grid(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }

bool WarehouseWorld::has_device(const std::string& id) const { return robots_.contains(id) || arms_.contains(id); }

DeviceKind WarehouseWorld::device_kind(const std::string& id) const {
  if (robots_.contains(id)) return DeviceKind::mobile_robot;
  if (arms_.contains(id)) return DeviceKind::robotic_arm;
  throw NotFoundError("unknown device '" + id + "'");
}

Cell WarehouseWorld::device_cell(const std::string& id) const {
  if (const auto r = robots_.find(id); r != robots_.end()) return r->second.cell;
  if (const auto a = arms_.find(id); a != arms_.end()) return a->second.base;
  throw NotFoundError("unknown device '" + id + "'");
}

Cell WarehouseWorld::pallet_cell(const std::string& pallet) const {
  const auto& loc = pallets_.at(pallet);
  if (loc.cell) return *loc.cell;
  if (const auto r = robots_.find(*loc.held_by); r != robots_.end()) return r->second.cell;
  return arms_.at(*loc.held_by).tool_cell;
}

std::string WarehouseWorld::position_label(Cell c) const {
  for (const auto& [label, cell] : stations_) {
    if (cell == c) return label;
  }
  return "cell:" + std::to_string(c.x) + "," + std::to_string(c.y);
}

std::optional<Cell> WarehouseWorld::station_cell(const std::string& label) const {
  const auto it = stations_.find(label);
  if (it == stations_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> WarehouseWorld::free_pallet_at(Cell cell) const {
  for (const auto& [id, loc] : pallets_) {
    if (loc.cell && *loc.cell == cell) return id;
  }
  return std::nullopt;
}

std::optional<std::string> WarehouseWorld::pallet_for_pick(Cell cell, const std::string& picker) const {
  if (auto free = free_pallet_at(cell)) return free;
  for (const auto& [id, loc] : pallets_) {
    if (!loc.held_by || *loc.held_by == picker) continue;
    if (const auto r = robots_.find(*loc.held_by); r != robots_.end() && r->second.cell == cell) return id;
  }
  return std::nullopt;
}

JointAngles WarehouseWorld::pose_for(const std::string& arm_id, Cell cell) const {
  const auto& arm = arms_.at(arm_id);
  const double dx = cell.x - arm.base.x;
  const double dy = cell.y - arm.base.y;
  const double dist = std::hypot(dx, dy);
  const double waist = dist == 0.0 ? 0.0 : std::atan2(dy, dx);
  return {waist, std::min(0.4 * dist, 1.5), std::max(-0.3 * dist, -1.5), 0.0};
}

bool WarehouseWorld::apply(const NativeCommand& cmd) {
  if (!has_device(cmd.device)) throw NotFoundError("unknown device '" + cmd.device + "'");
  const auto& queue = states_.at(cmd.device).queue;
  try {
    if (const auto r = robots_.find(cmd.device); r != robots_.end()) {
      Cell projected = r->second.cell;
      bool carrying = r->second.carrying.has_value();
      for (const auto& q : queue) {
        if (q.verb == Verb::goto_cell) projected = cell_from_json(q.args);
        if (q.verb == Verb::grip) carrying = true;
        if (q.verb == Verb::release) carrying = false;
      }
      switch (cmd.verb) {
        case Verb::goto_cell:
          if (!in_grid(cell_from_json(cmd.args))) return false;
          break;
        case Verb::set_velocity: {
          const int dx = cmd.args.at("dx").get<int>();
          const int dy = cmd.args.at("dy").get<int>();
          if (std::abs(dx) > 1 || std::abs(dy) > 1) return false;
          break;
        }
        case Verb::grip:
          if (carrying || !free_pallet_at(projected)) return false;
          break;
        case Verb::release:
          if (!carrying) return false;
          break;
        case Verb::set_joints:
          return false;
      }
    } else {
      const auto& arm = arms_.at(cmd.device);
      Gripper gripper = arm.gripper;
      Cell tool = arm.tool_cell;
      for (const auto& q : queue) {
        if (q.verb == Verb::set_joints) tool = cell_from_json(q.args);
        if (q.verb == Verb::grip) gripper = Gripper::closed;
        if (q.verb == Verb::release) gripper = Gripper::open;
      }
      switch (cmd.verb) {
        case Verb::set_joints: {
          const auto angles = cmd.args.at("angles").get<std::vector<double>>();
          if (angles.size() != kJointCount) return false;
          for (double a : angles) {
            if (!std::isfinite(a) || std::abs(a) > kJointLimit) return false;
          }
          if (!arm.reach.contains(cell_from_json(cmd.args))) return false;
          break;
        }
        case Verb::grip:
          if (gripper != Gripper::open || !arm.reach.contains(tool) || !pallet_for_pick(tool, arm.id)) return false;
          break;
        case Verb::release:
          if (gripper != Gripper::closed) return false;
          break;
        case Verb::goto_cell:
        case Verb::set_velocity:
          return false;
      }
    }
  } catch (const Json::exception&) {
    return false;
  } catch (const ValidationError&) {
    return false;
  }
  states_.at(cmd.device).queue.push_back(cmd);
  return true;
}

void WarehouseWorld::finish(DeviceState& state, const NativeCommand& cmd, bool ok) {
  state.queue.pop_front();
  if (!ok) {
    state.failed_command = cmd.command_id;
    while (!state.queue.empty() && state.queue.front().command_id == cmd.command_id) state.queue.pop_front();
    return;
  }
  if (state.queue.empty() || state.queue.front().command_id != cmd.command_id) {
    state.completed_command = cmd.command_id;
  }
}

void WarehouseWorld::step_robot(MobileRobotSim& robot, DeviceState& state) {
  if (state.queue.empty()) {
    if (robot.velocity == Cell{}) return;
    const Cell next{robot.cell.x + robot.velocity.x, robot.cell.y + robot.velocity.y};
    if (!in_grid(next)) {
      robot.velocity = {};
      return;
    }
    robot.heading = heading_for(robot.velocity.x, robot.velocity.y);
    robot.cell = next;
    return;
  }
  const NativeCommand cmd = state.queue.front();
  switch (cmd.verb) {
    case Verb::goto_cell: {
      const Cell target = cell_from_json(cmd.args);
      if (robot.cell != target) {
        // Greedy: close the x gap first, then y.
        const int dx = sign(target.x - robot.cell.x);
        const int dy = dx == 0 ? sign(target.y - robot.cell.y) : 0;
        robot.cell = {robot.cell.x + dx, robot.cell.y + dy};
        robot.heading = heading_for(dx, dy);
      }
      if (robot.cell == target) finish(state, cmd, true);
      break;
    }
    case Verb::set_velocity:
      robot.velocity = {cmd.args.at("dx").get<int>(), cmd.args.at("dy").get<int>()};
      finish(state, cmd, true);
      break;
    case Verb::grip: {
      const auto pallet = robot.carrying ? std::nullopt : free_pallet_at(robot.cell);
      if (pallet) {
        robot.carrying = *pallet;
        pallets_[*pallet] = PalletLocation{std::nullopt, robot.id};
      }
      finish(state, cmd, pallet.has_value());
      break;
    }
    case Verb::release: {
      const bool ok = robot.carrying.has_value();
      if (ok) {
        pallets_[*robot.carrying] = PalletLocation{robot.cell, std::nullopt};
        robot.carrying.reset();
      }
      finish(state, cmd, ok);
      break;
    }
    case Verb::set_joints:
      finish(state, cmd, false);
      break;
  }
}

void WarehouseWorld::step_arm(RoboticArmSim& arm, DeviceState& state) {
  if (state.queue.empty()) return;
  const NativeCommand cmd = state.queue.front();
  switch (cmd.verb) {
    case Verb::set_joints: {
      const auto target = cmd.args.at("angles").get<std::vector<double>>();
      bool reached = true;
      for (std::size_t i = 0; i < kJointCount; ++i) {
        const double delta = target[i] - arm.joints[i];
        if (std::abs(delta) <= kJointStep) {
          arm.joints[i] = target[i];
        } else {
          arm.joints[i] += delta > 0 ? kJointStep : -kJointStep;
          reached = false;
        }
      }
      if (reached) {
        arm.tool_cell = cell_from_json(cmd.args);
        finish(state, cmd, true);
      }
      break;
    }
    case Verb::grip: {
      const auto pallet = (arm.gripper == Gripper::open && arm.reach.contains(arm.tool_cell))
                              ? pallet_for_pick(arm.tool_cell, arm.id)
                              : std::nullopt;
      if (pallet) {
        const auto& prior = pallets_[*pallet];
        if (prior.held_by) robots_.at(*prior.held_by).carrying.reset();
        pallets_[*pallet] = PalletLocation{std::nullopt, arm.id};
        arm.holding = *pallet;
        arm.gripper = Gripper::closed;
      }
      finish(state, cmd, pallet.has_value());
      break;
    }
    case Verb::release: {
      const bool ok = arm.gripper == Gripper::closed;
      if (ok) {
        if (arm.holding) pallets_[*arm.holding] = PalletLocation{arm.tool_cell, std::nullopt};
        arm.holding.reset();
        arm.gripper = Gripper::open;
      }
      finish(state, cmd, ok);
      break;
    }
    case Verb::goto_cell:
    case Verb::set_velocity:
      finish(state, cmd, false);
      break;
  }
}

std::vector<Observation> WarehouseWorld::step() {
  ++tick_;
  // Robots move before arms so a pick in the same tick sees the new pose.
  for (auto& [id, robot] : robots_) step_robot(robot, states_.at(id));
  for (auto& [id, arm] : arms_) step_arm(arm, states_.at(id));
  return observe();
}

Observation WarehouseWorld::observe_device(const std::string& id) const {
  const auto& state = states_.at(id);
  Json payload;
  if (const auto r = robots_.find(id); r != robots_.end()) {
    payload = {{"kind", "pose"},
               {"x", r->second.cell.x},
               {"y", r->second.cell.y},
               {"heading", r->second.heading},
               {"carrying", optional_json(r->second.carrying)}};
  } else {
    const auto& arm = arms_.at(id);
    payload = {{"kind", "joints"},
               {"joint_states", arm.joints},
               {"gripper", arm.gripper == Gripper::open ? "open" : "closed"},
               {"holding", optional_json(arm.holding)},
               {"base", cell_json(arm.base)},
               {"tool", cell_json(arm.tool_cell)}};
  }
  payload["busy"] = !state.queue.empty();
  payload["completed_command"] = state.completed_command;
  payload["failed_command"] = state.failed_command;
  return {id, tick_, std::move(payload)};
}

std::vector<Observation> WarehouseWorld::observe() const {
  std::vector<Observation> out;
  for (const auto& [id, state] : states_) out.push_back(observe_device(id));
  return out;
}

Observation WarehouseWorld::observe_pallets() const {
  Json pallets = Json::object();
  for (const auto& [id, loc] : pallets_) {
    const Cell c = pallet_cell(id);
    pallets[id] = {{"x", c.x}, {"y", c.y}, {"held_by", optional_json(loc.held_by)}};
  }
  return {"warehouse", tick_, {{"kind", "pallets"}, {"pallets", pallets}}};
}

bool WarehouseWorld::busy() const {
  return std::any_of(states_.begin(), states_.end(), [](const auto& kv) { return !kv.second.queue.empty(); });
}

bool WarehouseWorld::device_busy(const std::string& id) const { return !states_.at(id).queue.empty(); }

}  // namespace kgmas
