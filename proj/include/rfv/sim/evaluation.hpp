#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rfv/policy/memory_context.hpp"
#include "rfv/policy/policy.hpp"
#include "rfv/policy/training.hpp"
#include "rfv/sim/tasks.hpp"

namespace rfv::sim {

// Closed-loop controller. reset() is called once per episode before act().
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void reset(const TaskInstance& task) = 0;
  virtual std::vector<double> act(const WorldState& state, const policy::RobotObservation& obs, int step) = 0;
};

using ControllerFactory = std::function<std::unique_ptr<Controller>()>;

// Scripted expert in closed loop.
ControllerFactory expert_controller();
// Always commands the same action.
ControllerFactory constant_controller(std::vector<double> action);
// Replays a fixed action list, holding the last action afterwards.
ControllerFactory replay_controller(std::vector<std::vector<double>> actions);
// Trained policy with retrieval (memory may be null) and action ensembling.
// The policy and memory context must outlive every controller created.
ControllerFactory policy_controller(const policy::Policy& policy, const policy::MemoryContext* memory);

struct RolloutResult {
  bool success = false;
  int steps = 0;
  std::vector<std::vector<double>> actions;
  std::vector<WorldState> states;  // initial state plus one per executed step
};

// observe -> act -> step until success or max_steps.
RolloutResult rollout(Controller& controller, const TaskInstance& task, int max_steps);

// Seed of evaluation episode `episode` of task `task_index` under `seed`;
// disjoint from the demo collection seeds.
std::uint64_t episode_seed(std::uint64_t seed, std::size_t task_index, int episode);

struct EvalTable {
  std::vector<std::string> tasks;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<double>> success;  // [task][seed] success rate in [0,1]

  double task_mean(std::size_t task) const;
  double seed_mean(std::size_t seed) const;
  double aggregate() const;
  std::string to_csv() const;
  std::string to_text() const;
};

struct EvalOptions {
  int episodes = 20;
  int max_steps = 40;
  unsigned threads = 0;  // 0: hardware concurrency
};

// `factory_for_seed` supplies the controller for each seed (e.g. the policy
// trained with that seed). Episodes run in parallel; aggregation order is fixed.
EvalTable evaluate(const std::function<ControllerFactory(std::uint64_t)>& factory_for_seed,
                   const std::vector<TaskSpec>& suite, const std::vector<std::uint64_t>& seeds,
                   const EvalOptions& options = {});

// Runs fn(i) for i in [0, n) on up to `threads` workers; the first exception
// is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace rfv::sim
