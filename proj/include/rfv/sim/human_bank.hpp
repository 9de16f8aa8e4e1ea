#pragma once

#include <cstdint>
#include <vector>

#include "rfv/bank/bank.hpp"
#include "rfv/midlevel/ingest.hpp"
#include "rfv/sim/tasks.hpp"

namespace rfv::sim {

struct HumanBankOptions {
  int max_frames = 12;            // clips are subsampled to at most this many frames
  double goal_noise = 0.02;
  int reach_linger = 2;
  midlevel::AnnotationOptions annotation{0.5, midlevel::kDefaultSmoothingLambda};
};

// Detector-style record for one rendered hand episode: hand boxes around the
// cursor and the target object's silhouette in every frame.
midlevel::IngestRecord human_record(const TaskInstance& task, const std::string& entry_id,
                                    std::uint64_t seed, const HumanBankOptions& options = {});

// n_per_task annotated entries per spec, ids "human_<Task>_<i>". Landmark
// tasks cycle through the spec's landmarks so every landmark is covered.
// Expert failures are re-seeded.
bank::Bank synthesize_human_bank(const std::vector<TaskSpec>& specs, int n_per_task,
                                 std::uint64_t seed, const HumanBankOptions& options = {});

}  // namespace rfv::sim
