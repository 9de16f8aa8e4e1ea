#include "rfv/sim/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rfv/core/error.hpp"
#include "rfv/core/rng.hpp"

namespace rfv::sim {

std::string_view task_type_name(TaskType type) {
  switch (type) {
    case TaskType::kReach: return "Reach";
    case TaskType::kPickPlace: return "PickPlace";
    case TaskType::kPlaceInBox: return "PlaceInBox";
    case TaskType::kPush: return "Push";
  }
  return "?";
}

TaskType parse_task_type(std::string_view name) {
  for (TaskType t : {TaskType::kReach, TaskType::kPickPlace, TaskType::kPlaceInBox, TaskType::kPush}) {
    if (task_type_name(t) == name) return t;
  }
  throw Error(ErrorCode::kConfigError, "unknown task type '" + std::string(name) + "'");
}

bool uses_landmark(TaskType type) { return type == TaskType::kPickPlace || type == TaskType::kPush; }

TaskSpec default_spec(TaskType type) {
  TaskSpec s;
  s.type = type;
  s.name = std::string(task_type_name(type));
  for (int c = 0; c < static_cast<int>(palette().size()); ++c)
    if (c != kHeldOutColor) s.colors.push_back(c);
  s.spawn_slots = {5, 6, 9};
  if (type == TaskType::kPlaceInBox) s.box_slots = {0, 3, 12, 15};
  if (uses_landmark(type)) {
    s.landmark_ids.resize(landmarks().size());
    std::iota(s.landmark_ids.begin(), s.landmark_ids.end(), 0);
  }
  return s;
}

TaskSpec with_held_out(TaskSpec spec) {
  if (std::find(spec.colors.begin(), spec.colors.end(), kHeldOutColor) == spec.colors.end())
    spec.colors.push_back(kHeldOutColor);
  if (std::find(spec.spawn_slots.begin(), spec.spawn_slots.end(), kHeldOutSlot) == spec.spawn_slots.end())
    spec.spawn_slots.push_back(kHeldOutSlot);
  return spec;
}

std::vector<TaskSpec> default_suite() {
  return {default_spec(TaskType::kReach), default_spec(TaskType::kPickPlace),
          default_spec(TaskType::kPlaceInBox), default_spec(TaskType::kPush)};
}

std::string instruction_text(TaskType type, int color, int landmark) {
  const std::string& c = palette().at(static_cast<std::size_t>(color)).name;
  switch (type) {
    case TaskType::kReach: return "touch the " + c + " ball";
    case TaskType::kPickPlace:
      return "put the " + c + " cube on the " + landmarks().at(static_cast<std::size_t>(landmark)).name;
    case TaskType::kPlaceInBox: return "put the " + c + " cube in the box";
    case TaskType::kPush:
      return "push the " + c + " block to the " + landmarks().at(static_cast<std::size_t>(landmark)).name;
  }
  return "";
}

std::string narration_text(TaskType type, int color, int landmark) {
  switch (type) {
    case TaskType::kPickPlace:
      return "put the cube on the " + landmarks().at(static_cast<std::size_t>(landmark)).name;
    case TaskType::kPush:
      return "push the block to the " + landmarks().at(static_cast<std::size_t>(landmark)).name;
    default: return instruction_text(type, color, landmark);
  }
}

namespace {

constexpr double kArrivalTolerance = 0.03;

Object make_object(ObjectKind kind, int color, double x, double y) {
  Object o;
  o.kind = kind;
  o.color = color;
  o.x = x;
  o.y = y;
  switch (kind) {
    case ObjectKind::kBall: o.half_w = o.half_h = 0.05; break;
    case ObjectKind::kCube: o.half_w = o.half_h = 0.045; break;
    case ObjectKind::kBlock: o.half_w = 0.07; o.half_h = 0.045; break;
    case ObjectKind::kBox: o.half_w = o.half_h = 0.1; o.color = -1; break;
  }
  return o;
}

ObjectKind target_kind(TaskType type) {
  switch (type) {
    case TaskType::kReach: return ObjectKind::kBall;
    case TaskType::kPush: return ObjectKind::kBlock;
    default: return ObjectKind::kCube;
  }
}

template <typename T>
T pick(Rng& rng, const std::vector<T>& from) {
  if (from.empty()) throw Error(ErrorCode::kConfigError, "empty randomisation range");
  return from[rng.below(from.size())];
}

}  // namespace

TaskInstance generate_task(const TaskSpec& spec, std::uint64_t seed) {
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(spec.type) + 17));
  TaskInstance t;
  t.spec = spec;
  t.color = pick(rng, spec.colors);

  std::vector<bool> used(kSlotGrid * kSlotGrid, false);
  auto place = [&](ObjectKind kind, int color, int slot) {
    used[static_cast<std::size_t>(slot)] = true;
    const auto c = slot_center(slot);
    const double j = kind == ObjectKind::kBox ? 0.0 : spec.spawn_jitter;
    t.initial.objects.push_back(make_object(kind, color, c[0] + rng.uniform(-j, j), c[1] + rng.uniform(-j, j)));
    return static_cast<int>(t.initial.objects.size()) - 1;
  };
  auto free_slot = [&]() {
    std::vector<int> free;
    for (int s = 0; s < kSlotGrid * kSlotGrid; ++s)
      if (!used[static_cast<std::size_t>(s)]) free.push_back(s);
    return pick(rng, free);
  };

  const ObjectKind kind = target_kind(spec.type);
  t.target_object = place(kind, t.color, pick(rng, spec.spawn_slots));
  if (uses_landmark(spec.type)) {
    const Object& target = t.initial.objects.back();
    std::vector<int> far;
    for (int id : spec.landmark_ids) {
      const Landmark& l = landmarks().at(static_cast<std::size_t>(id));
      if (std::hypot(l.x - target.x, l.y - target.y) >= kMinGoalDistance) far.push_back(id);
    }
    if (far.empty()) throw Error(ErrorCode::kConfigError, "every landmark lies next to the spawn point");
    t.landmark = pick(rng, far);
  }
  t.instruction = instruction_text(spec.type, t.color, t.landmark);
  if (spec.type == TaskType::kPlaceInBox) {
    std::vector<int> options;
    for (int slot : spec.box_slots)
      if (!used[static_cast<std::size_t>(slot)]) options.push_back(slot);
    t.box_object = place(ObjectKind::kBox, -1, options.empty() ? free_slot() : pick(rng, options));
  }

  const ObjectKind kinds[] = {ObjectKind::kBall, ObjectKind::kCube, ObjectKind::kBlock};
  for (int i = 0; i < spec.distractors; ++i) {
    ObjectKind dk;
    int dc;
    do {
      dk = kinds[rng.below(3)];
      dc = static_cast<int>(rng.below(palette().size()));
    } while (dk == kind && dc == t.color);
    place(dk, dc, free_slot());
  }

  t.initial.effector.x = 0.5 + rng.uniform(-0.05, 0.05);
  t.initial.effector.y = 0.95 + rng.uniform(-0.03, 0.03);
  if (t.landmark >= 0) {
    const Landmark& l = landmarks()[static_cast<std::size_t>(t.landmark)];
    t.initial.targets.push_back({l.x, l.y, 0.1});
  }
  return t;
}

bool is_success(const TaskInstance& task, const WorldState& state) {
  const Object& o = state.objects.at(static_cast<std::size_t>(task.target_object));
  switch (task.spec.type) {
    case TaskType::kReach:
      return std::hypot(state.effector.x - o.x, state.effector.y - o.y) < 0.06;
    case TaskType::kPickPlace: {
      const Landmark& l = landmarks()[static_cast<std::size_t>(task.landmark)];
      return !o.held && std::hypot(o.x - l.x, o.y - l.y) < 0.1;
    }
    case TaskType::kPlaceInBox: {
      const Object& box = state.objects.at(static_cast<std::size_t>(task.box_object));
      return !o.held && std::abs(o.x - box.x) < box.half_w && std::abs(o.y - box.y) < box.half_h;
    }
    case TaskType::kPush: {
      const Landmark& l = landmarks()[static_cast<std::size_t>(task.landmark)];
      return !o.held && std::hypot(o.x - l.x, o.y - l.y) < 0.12;
    }
  }
  return false;
}

ExpertController::ExpertController(const TaskInstance& task, const ExpertOptions& options)
    : task_(task), options_(options) {
  Rng rng(mix_seed(options.noise_seed, 99));
  noise_x_ = rng.uniform(-options.goal_noise, options.goal_noise);
  noise_y_ = rng.uniform(-options.goal_noise, options.goal_noise);
}

std::vector<double> ExpertController::act(const WorldState& state) {
  const Effector& e = state.effector;
  const Object& o = state.objects.at(static_cast<std::size_t>(task_.target_object));
  auto at = [&](double x, double y) { return std::hypot(e.x - x, e.y - y) < kArrivalTolerance; };

  if (task_.spec.type == TaskType::kReach) return {o.x, o.y, 0.0, 0.0};

  // Phases: 0 approach, 1 grasp, 2 carry, 3 release.
  if (phase_ == 0) {
    if (!at(o.x, o.y)) return {o.x, o.y, 0.0, 0.0};
    phase_ = 1;
  }
  if (phase_ == 1) {
    if (!o.held || dwell_ < options_.grasp_dwell) {
      if (o.held) ++dwell_;
      return {o.x, o.y, 1.0, 0.0};
    }
    phase_ = 2;
  }
  if (!goal_set_) {
    double gx = 0.0, gy = 0.0;
    if (task_.spec.type == TaskType::kPlaceInBox) {
      const Object& box = state.objects.at(static_cast<std::size_t>(task_.box_object));
      gx = box.x;
      gy = box.y;
    } else {
      const Landmark& l = landmarks()[static_cast<std::size_t>(task_.landmark)];
      gx = l.x - o.grasp_dx;
      gy = l.y - o.grasp_dy;
    }
    goal_x_ = std::clamp(gx + noise_x_, 0.0, 1.0);
    goal_y_ = std::clamp(gy + noise_y_, 0.0, 1.0);
    goal_set_ = true;
  }
  if (phase_ == 2) {
    if (!at(goal_x_, goal_y_)) return {goal_x_, goal_y_, 1.0, 0.0};
    phase_ = 3;
  }
  return {goal_x_, goal_y_, 0.0, 0.0};
}

Demo scripted_expert(const TaskInstance& task, const ExpertOptions& options) {
  ExpertController expert(task, options);
  DynamicsOptions dyn;
  dyn.max_speed = options.speed;
  RenderOptions ro;
  ro.human_hand = options.human_hand;
  ro.draw_effector = options.human_hand;

  Demo demo;
  demo.instruction = task.instruction;
  demo.task_type = task.spec.type;
  WorldState state = task.initial;
  Rng noise(mix_seed(options.noise_seed, 0xda27));
  int linger = -1;
  for (int step = 0; step < options.max_steps; ++step) {
    const std::vector<double> action = expert.act(state);
    demo.states.push_back(state);
    demo.frames.push_back(render(state, kRenderSize, kRenderSize, ro));
    demo.proprio.push_back(proprio(state));
    demo.actions.push_back(action);
    std::vector<double> executed = action;
    if (options.action_noise > 0.0) {
      executed[0] += noise.uniform(-options.action_noise, options.action_noise);
      executed[1] += noise.uniform(-options.action_noise, options.action_noise);
    }
    state = step_dynamics(state, executed, dyn);
    if (linger < 0 && is_success(task, state)) {
      demo.success = true;
      linger = options.linger_steps;
    }
    if (linger == 0) break;
    if (linger > 0) --linger;
  }
  demo.states.push_back(state);
  if (!demo.success) {
    throw Error(ErrorCode::kExpertFailure, "expert did not solve '" + task.instruction + "'");
  }
  return demo;
}

}  // namespace rfv::sim
