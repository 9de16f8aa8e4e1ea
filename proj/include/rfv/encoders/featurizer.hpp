#pragma once

#include <cstdint>
#include <vector>

#include "rfv/bank/types.hpp"
#include "rfv/encoders/tokens.hpp"
#include "rfv/nncore/tensor.hpp"

namespace rfv::encoders {

struct FeaturizerConfig {
  int grid = 4;
  std::size_t d_model = 64;
  std::uint64_t projection_seed = 1234;
  bool operator==(const FeaturizerConfig&) const = default;
};

// Channel means per cell of a grid x grid partition, intensities scaled to
// [0, 1]. Cell (cx, cy) covers x in [cx*W/g, (cx+1)*W/g) (integer division);
// rows are cells in row-major order, columns are channels.
nn::Tensor grid_means(const bank::Frame& frame, int grid);

// Fixed random channel -> d_model projection (channels x d_model).
nn::Tensor featurizer_projection(const FeaturizerConfig& config, int channels = 3);

// Toy patch-mean featurizer: per frame, grid^2 tokens of
// grid_means(frame) * projection.
std::vector<TokenSet> frame_features(const bank::VideoClip& clip, const FeaturizerConfig& config);

// Ingested features (one vector per frame) passed through verbatim as one
// token per frame. Throws kDimMismatch if the width is not d_model.
std::vector<TokenSet> frame_features(const std::vector<std::vector<float>>& ingested,
                                     const FeaturizerConfig& config);

nn::Tensor frame_tokens(const bank::Frame& frame, const FeaturizerConfig& config,
                        const nn::Tensor& projection);

}  // namespace rfv::encoders
