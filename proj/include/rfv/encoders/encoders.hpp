#pragma once

#include <string>
#include <vector>

#include "rfv/bank/types.hpp"
#include "rfv/encoders/tokens.hpp"
#include "rfv/nncore/ops.hpp"

namespace rfv::encoders {

constexpr int kMaskGrid = 16;
constexpr int kTrajectoryPoints = 16;

// Fractional foreground coverage per cell of a grid x grid partition,
// flattened row-major into a 1 x grid^2 tensor.
nn::Tensor occupancy_grid(const bank::AffordanceMask& mask, int grid = kMaskGrid);

// Mask token: mlp(occupancy_grid(mask)), 1 x d_model.
nn::Tensor encode_mask(const bank::AffordanceMask& mask, const nn::Mlp& mlp, nn::MlpCache& cache,
                       int grid = kMaskGrid);

// Arc-length-uniform resampling to `points` (x, y) pairs in pixel units.
// Throws kTooFewPoints for fewer than 2 input points.
std::vector<std::pair<double, double>> resample_trajectory(const bank::HandTrajectory& traj,
                                                           int points = kTrajectoryPoints);

// Resampled points normalised by (width, height), flattened as
// [x0, y0, x1, y1, ...] into 1 x 2*points.
nn::Tensor trajectory_vector(const bank::HandTrajectory& traj, int width, int height,
                             int points = kTrajectoryPoints);

nn::Tensor encode_trajectory(const bank::HandTrajectory& traj, int width, int height,
                             const nn::Mlp& mlp, nn::MlpCache& cache,
                             int points = kTrajectoryPoints);

struct MemoryFeature {
  std::string entry_id;
  TokenSequence tokens;
  double score = 0.0;
};

// Layout [TEXT...][STATE][VIDEO...][MASK][TRAJ], positions 0..len-1.
// Throws kDimMismatch when widths differ, kInvalidArgument on empty text or
// video.
TokenSequence assemble_memory(const nn::Tensor& text, const nn::Tensor& state,
                              const TokenSequence& video, const nn::Tensor& mask,
                              const nn::Tensor& traj);

// Canonical order: descending score, then ascending entry_id.
void sort_memories(std::vector<MemoryFeature>& memories);

// Joins memories in canonical order with `sep` (1 x d) between consecutive
// entries; positions are reassigned 0..total-1 and owners set to each
// memory's rank (-1 on SEP tokens).
TokenSequence concat_memories(std::vector<MemoryFeature> memories, const nn::Tensor& sep);

}  // namespace rfv::encoders
