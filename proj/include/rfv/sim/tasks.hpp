#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rfv/bank/types.hpp"
#include "rfv/sim/world.hpp"

namespace rfv::sim {

enum class TaskType : std::uint8_t { kReach, kPickPlace, kPlaceInBox, kPush };

std::string_view task_type_name(TaskType type);
TaskType parse_task_type(std::string_view name);  // kConfigError on unknown names

struct TaskSpec {
  TaskType type = TaskType::kReach;
  std::string name;                   // row label in result tables
  std::vector<int> colors;            // allowed target colors (palette ids)
  std::vector<int> spawn_slots;       // allowed slots for the target object
  std::vector<int> box_slots;         // allowed slots for the box (PlaceInBox)
  std::vector<int> landmark_ids;      // allowed goal landmarks (landmark tasks)
  int distractors = 0;
  double spawn_jitter = 0.03;

  bool operator==(const TaskSpec&) const = default;
};

// Conditions kept out of the default specs for generalization probes.
inline constexpr int kHeldOutColor = 7;  // pink
inline constexpr int kHeldOutSlot = 10;

// Every landmark and every color but kHeldOutColor; targets spawn in the
// central slots other than kHeldOutSlot and the box in a corner slot.
TaskSpec default_spec(TaskType type);
// The same spec with the held-out color and slot added back.
TaskSpec with_held_out(TaskSpec spec);
// The four-task benchmark suite in Reach, PickPlace, PlaceInBox, Push order.
std::vector<TaskSpec> default_suite();

bool uses_landmark(TaskType type);

// Robot instruction, e.g. "put the red cube on the lamp".
std::string instruction_text(TaskType type, int color, int landmark);
// Narration of the matching human clip. Landmark tasks leave out the color.
std::string narration_text(TaskType type, int color, int landmark);

struct TaskInstance {
  TaskSpec spec;
  WorldState initial;
  std::string instruction;
  int target_object = 0;  // index into initial.objects
  int box_object = -1;    // PlaceInBox only
  int color = 0;
  int landmark = -1;      // landmark tasks only
};

inline constexpr double kMinGoalDistance = 0.2;

// Deterministic per (spec, seed): objects occupy distinct slots (so never
// overlap), distractors never share the target's kind and color, and a goal
// landmark is at least kMinGoalDistance away from the target's spawn point.
TaskInstance generate_task(const TaskSpec& spec, std::uint64_t seed);

// Pure function of the state.
bool is_success(const TaskInstance& task, const WorldState& state);

struct Demo {
  std::string instruction;
  TaskType task_type = TaskType::kReach;
  std::vector<bank::Frame> frames;             // observation per step
  std::vector<std::vector<double>> proprio;    // per step
  std::vector<std::vector<double>> actions;    // expert action per step
  bool success = false;
  std::vector<WorldState> states;              // state before each action, plus the final state
};

struct ExpertOptions {
  int max_steps = 80;
  double speed = kMaxSpeed;
  bool human_hand = false;     // render a hand cursor
  double goal_noise = 0.0;     // uniform jitter of the carry goal (human imprecision)
  int linger_steps = 0;        // extra steps recorded after success
  int grasp_dwell = 2;         // steps held still with the gripper closed before carrying
  double action_noise = 0.0;   // uniform jitter on the executed (x, y); recorded actions stay clean
  std::uint64_t noise_seed = 0;
};

// Waypoint controller (approach, grasp, carry, release). Throws
// kExpertFailure if the predicate is not met within max_steps.
Demo scripted_expert(const TaskInstance& task, const ExpertOptions& options = {});

// Stateful expert usable as a closed-loop controller.
class ExpertController {
 public:
  ExpertController(const TaskInstance& task, const ExpertOptions& options = {});
  std::vector<double> act(const WorldState& state);

 private:
  TaskInstance task_;
  ExpertOptions options_;
  int phase_ = 0;
  int dwell_ = 0;
  double goal_x_ = 0.0;
  double goal_y_ = 0.0;
  bool goal_set_ = false;
  double noise_x_ = 0.0;
  double noise_y_ = 0.0;
};

}  // namespace rfv::sim
