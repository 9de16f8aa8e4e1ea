#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rfv/policy/memory_context.hpp"
#include "rfv/policy/training.hpp"
#include "rfv/sim/tasks.hpp"

namespace rfv::sim {

// n_per_task successful expert demos per spec, re-seeding on expert failure.
std::vector<Demo> collect_demos(const std::vector<TaskSpec>& specs, int n_per_task, std::uint64_t seed,
                                const ExpertOptions& options = {});

// Directory layout: episode_<i>.json (instruction, task, proprio, actions,
// success) next to episode_<i>.frames.rfvb holding the u8 frames back to back.
// States are not persisted.
void save_demos(const std::vector<Demo>& demos, const std::filesystem::path& dir);
std::vector<Demo> load_demos(const std::filesystem::path& dir);

// Translation augmentation: each extra copy of a demo shifts the whole scene,
// the proprio, the action targets and the retrieved trajectories by one
// random offset of at most `span` per axis, chosen so everything stays on
// the table. Needs the demo's world states.
struct AugmentOptions {
  int copies = 0;
  double span = 0.3;
  std::uint64_t seed = 0;
};

// One sample per demo step (and per augmented copy); the target chunk
// repeats the last action past the end of the demo. Memories are retrieved
// with the demo instruction when `memory` is given and the config enables
// retrieval.
std::vector<policy::TrainingSample> training_samples(const std::vector<Demo>& demos,
                                                     const policy::PolicyConfig& config,
                                                     const policy::MemoryContext* memory,
                                                     const AugmentOptions& augment = {});

}  // namespace rfv::sim
