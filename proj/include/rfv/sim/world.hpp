#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rfv/bank/types.hpp"

namespace rfv::sim {

enum class ObjectKind : std::uint8_t { kBall, kCube, kBlock, kBox };
enum class Shape : std::uint8_t { kDisc, kRect };

std::string_view object_kind_name(ObjectKind kind);
Shape shape_of(ObjectKind kind);

struct Color {
  std::string name;
  std::array<std::uint8_t, 3> rgb;
};

// Fixed palette; index into it is an object's color id.
const std::vector<Color>& palette();

struct Landmark {
  std::string name;
  double x = 0.0;
  double y = 0.0;
};

// Named table locations that are never rendered.
const std::vector<Landmark>& landmarks();

struct Object {
  ObjectKind kind = ObjectKind::kCube;
  double x = 0.0;
  double y = 0.0;
  double half_w = 0.04;  // disc radius or rect half-extent along x
  double half_h = 0.04;  // rect half-extent along y
  double yaw = 0.0;
  int color = 0;
  bool held = false;
  double grasp_dx = 0.0;  // object minus effector offset while held
  double grasp_dy = 0.0;

  bool operator==(const Object&) const = default;
};

struct Effector {
  double x = 0.5;
  double y = 0.5;
  double gripper = 0.0;  // >= 0.5 closed / lowered
  double yaw = 0.0;
  bool operator==(const Effector&) const = default;
};

struct TargetRegion {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
  bool operator==(const TargetRegion&) const = default;
};

struct WorldState {
  Effector effector;
  std::vector<Object> objects;
  std::vector<TargetRegion> targets;
  int step = 0;

  int held_index() const;  // -1 when nothing is held
  bool operator==(const WorldState&) const = default;
};

inline constexpr std::size_t kDof = 4;  // x, y, gripper, yaw
inline constexpr double kMaxSpeed = 0.08;
inline constexpr double kHumanSpeed = 0.16;
inline constexpr double kMaxYawRate = 0.3;
inline constexpr double kGraspRadius = 0.07;
inline constexpr int kSlotGrid = 4;

std::array<double, 2> slot_center(int slot);

struct DynamicsOptions {
  double max_speed = kMaxSpeed;
};

// Kinematic step: the effector moves toward the action's (x, y) target with
// clipped speed and turns toward its yaw; a closed empty gripper picks up the
// nearest cube or block within kGraspRadius (cubes snap to the effector,
// blocks keep their offset and slide); opening releases. Deterministic.
WorldState step_dynamics(const WorldState& state, const std::vector<double>& action,
                         const DynamicsOptions& options = {});

std::vector<double> proprio(const WorldState& state);

struct RenderOptions {
  bool human_hand = false;  // draw a hand cursor instead of the robot effector
  bool draw_effector = true;
};

inline constexpr int kRenderSize = 32;

// Rasterises the scene with a fixed palette; a pixel belongs to a shape when
// its center lies inside it.
bank::Frame render(const WorldState& state, int width = kRenderSize, int height = kRenderSize,
                   const RenderOptions& options = {});

// Robot camera frame: the scene without the effector, whose pose reaches
// the policy through proprio instead.
bank::Frame robot_view(const WorldState& state);

// Binary silhouette of one object, row-major width x height.
std::vector<std::uint8_t> render_silhouette(const Object& object, int width, int height);

}  // namespace rfv::sim
