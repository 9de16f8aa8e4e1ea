#include "rfv/encoders/featurizer.hpp"

#include <cmath>

#include "rfv/core/error.hpp"
#include "rfv/core/rng.hpp"

namespace rfv::encoders {

nn::Tensor grid_means(const bank::Frame& frame, int grid) {
  if (grid < 1) throw Error(ErrorCode::kInvalidArgument, "grid must be >= 1");
  const int g = grid;
  nn::Tensor sums(static_cast<std::size_t>(g * g), static_cast<std::size_t>(frame.channels));
  std::vector<double> counts(static_cast<std::size_t>(g * g), 0.0);
  for (int cy = 0; cy < g; ++cy) {
    const int y0 = cy * frame.height / g;
    const int y1 = (cy + 1) * frame.height / g;
    for (int cx = 0; cx < g; ++cx) {
      const int x0 = cx * frame.width / g;
      const int x1 = (cx + 1) * frame.width / g;
      const std::size_t cell = static_cast<std::size_t>(cy * g + cx);
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          for (int c = 0; c < frame.channels; ++c) sums(cell, static_cast<std::size_t>(c)) += frame.at(x, y, c);
        }
      }
      counts[cell] = static_cast<double>((x1 - x0) * (y1 - y0));
    }
  }
  for (std::size_t cell = 0; cell < counts.size(); ++cell) {
    for (std::size_t c = 0; c < sums.cols(); ++c) {
      sums(cell, c) = counts[cell] > 0 ? sums(cell, c) / (255.0 * counts[cell]) : 0.0;
    }
  }
  return sums;
}

nn::Tensor featurizer_projection(const FeaturizerConfig& config, int channels) {
  Rng rng(config.projection_seed);
  nn::Tensor p(static_cast<std::size_t>(channels), config.d_model);
  const double bound = 1.0 / std::sqrt(static_cast<double>(channels));
  for (double& v : p.values()) v = rng.uniform(-bound, bound) * 3.0;
  return p;
}

nn::Tensor frame_tokens(const bank::Frame& frame, const FeaturizerConfig& config,
                        const nn::Tensor& projection) {
  return nn::matmul(grid_means(frame, config.grid), projection);
}

std::vector<TokenSet> frame_features(const bank::VideoClip& clip, const FeaturizerConfig& config) {
  if (clip.frames.empty()) throw Error(ErrorCode::kInvalidArgument, "clip has no frames");
  const nn::Tensor projection = featurizer_projection(config, clip.frames.front().channels);
  std::vector<TokenSet> out;
  out.reserve(clip.frames.size());
  for (const auto& frame : clip.frames) {
    out.push_back(make_token_set(frame_tokens(frame, config, projection)));
  }
  return out;
}

std::vector<TokenSet> frame_features(const std::vector<std::vector<float>>& ingested,
                                     const FeaturizerConfig& config) {
  if (ingested.empty()) throw Error(ErrorCode::kInvalidArgument, "no ingested features");
  std::vector<TokenSet> out;
  for (const auto& f : ingested) {
    if (f.size() != config.d_model) {
      throw Error(ErrorCode::kDimMismatch, "ingested feature width " + std::to_string(f.size()) +
                                               ", d_model " + std::to_string(config.d_model));
    }
    nn::Tensor t(1, config.d_model);
    for (std::size_t i = 0; i < f.size(); ++i) t(0, i) = f[i];
    out.push_back(make_token_set(std::move(t)));
  }
  return out;
}

}  // namespace rfv::encoders
