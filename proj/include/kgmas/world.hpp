#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kgmas/json.hpp"

namespace kgmas {

struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

std::string to_string(Cell c);

enum class DeviceKind { mobile_robot, robotic_arm };
enum class Verb { set_velocity, goto_cell, set_joints, grip, release };
enum class Gripper { open, closed };

std::string to_string(Verb verb);
Verb verb_from_string(const std::string& text);

inline constexpr std::size_t kJointCount = 4;
/// Per-tick joint interpolation step, radians.
inline constexpr double kJointStep = 0.1;
/// Symmetric joint limit, radians.
inline constexpr double kJointLimit = 3.14159265358979323846;

using JointAngles = std::array<double, kJointCount>;

/// Arguments by verb: goto_cell {x,y}; set_velocity {dx,dy} in {-1,0,1};
/// set_joints {angles:[4], x, y} where (x,y) is the tool cell reached;
/// grip / release take none.
struct NativeCommand {
  std::string device;
  Verb verb = Verb::goto_cell;
  Json args = Json::object();
  std::uint64_t command_id = 0;

  bool operator==(const NativeCommand&) const = default;
};

struct Observation {
  std::string device;
  std::uint64_t tick = 0;
  Json payload;  // {"kind": "pose" | "joints" | "pallets", ...}

  bool operator==(const Observation&) const = default;
};

struct MobileRobotSim {
  std::string id;
  Cell cell;
  int heading = 0;  // degrees; 0 = +x, 90 = +y
  int speed = 1;    // cells per tick
  Cell velocity;    // cells per tick, each component in {-1, 0, 1}
  std::optional<std::string> carrying;
};

struct RoboticArmSim {
  std::string id;
  Cell base;
  JointAngles joints{};
  Gripper gripper = Gripper::open;
  std::set<Cell> reach;
  Cell tool_cell;
  std::optional<std::string> holding;
};

/// A pallet rests on a cell or is held by one device.
struct PalletLocation {
  std::optional<Cell> cell;
  std::optional<std::string> held_by;
};

/// Deterministic discrete warehouse. Mutated only through apply() and step().
class WarehouseWorld {
 public:
  /// Parses and validates a world fixture document.
  static WarehouseWorld from_json(const Json& doc);

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint64_t tick() const { return tick_; }
  std::uint64_t seed() const { return seed_; }
  const std::map<std::string, Cell>& stations() const { return stations_; }
  const std::map<std::string, PalletLocation>& pallets() const { return pallets_; }
  const std::map<std::string, MobileRobotSim>& robots() const { return robots_; }
  const std::map<std::string, RoboticArmSim>& arms() const { return arms_; }

  bool has_device(const std::string& id) const;
  DeviceKind device_kind(const std::string& id) const;
  /// Cell occupied by the device (robot position or arm base).
  Cell device_cell(const std::string& id) const;
  /// Cell of the pallet, or of its holder.
  Cell pallet_cell(const std::string& pallet) const;
  bool in_grid(Cell c) const;

  /// Station label when the cell is a station, else "cell:x,y".
  std::string position_label(Cell c) const;
  std::optional<Cell> station_cell(const std::string& label) const;

  /// Queues the command after checking it against the device state projected
  /// through its already-queued commands. Throws NotFoundError for an unknown
  /// device.
  bool apply(const NativeCommand& cmd);

  /// Advances one tick and returns one observation per device, in id order.
  std::vector<Observation> step();

  /// Current observation of every device without advancing time.
  std::vector<Observation> observe() const;
  Observation observe_device(const std::string& id) const;
  /// Pallet-sensing observation ("warehouse" source).
  Observation observe_pallets() const;

  /// True while any device has queued commands.
  bool busy() const;
  bool device_busy(const std::string& id) const;

  /// Joint targets that place the arm's tool over `cell`.
  JointAngles pose_for(const std::string& arm_id, Cell cell) const;

 private:
  struct DeviceState {
    std::deque<NativeCommand> queue;
    std::uint64_t completed_command = 0;
    std::uint64_t failed_command = 0;
  };

  void finish(DeviceState& state, const NativeCommand& cmd, bool ok);
  void step_robot(MobileRobotSim& robot, DeviceState& state);
  void step_arm(RoboticArmSim& arm, DeviceState& state);
  std::optional<std::string> pallet_for_pick(Cell cell, const std::string& picker) const;
  std::optional<std::string> free_pallet_at(Cell cell) const;

  int width_ = 0;
  int height_ = 0;
  std::uint64_t tick_ = 0;
  std::uint64_t seed_ = 0;
  std::map<std::string, Cell> stations_;
  std::map<std::string, PalletLocation> pallets_;
  std::map<std::string, MobileRobotSim> robots_;
  std::map<std::string, RoboticArmSim> arms_;
  std::map<std::string, DeviceState> states_;
};

}  // namespace kgmas
