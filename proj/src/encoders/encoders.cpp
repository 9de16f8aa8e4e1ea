#include "rfv/encoders/encoders.hpp"

#include <algorithm>
#include <cmath>

#include "rfv/bank/rle.hpp"
#include "rfv/core/error.hpp"

namespace rfv::encoders {

nn::Tensor occupancy_grid(const bank::AffordanceMask& mask, int grid) {
  if (grid < 1) throw Error(ErrorCode::kInvalidArgument, "grid must be >= 1");
  const std::vector<std::uint8_t> pixels = bank::decode_rle(mask.runs, mask.width, mask.height);
  const int w = mask.width;
  const int h = mask.height;
  nn::Tensor out(1, static_cast<std::size_t>(grid * grid));
  for (int cy = 0; cy < grid; ++cy) {
    const int y0 = cy * h / grid, y1 = (cy + 1) * h / grid;
    for (int cx = 0; cx < grid; ++cx) {
      const int x0 = cx * w / grid, x1 = (cx + 1) * w / grid;
      const int area = (x1 - x0) * (y1 - y0);
      if (area == 0) continue;
      int count = 0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) count += pixels[static_cast<std::size_t>(y * w + x)] ? 1 : 0;
      }
      out(0, static_cast<std::size_t>(cy * grid + cx)) = static_cast<double>(count) / area;
    }
  }
  return out;
}

nn::Tensor encode_mask(const bank::AffordanceMask& mask, const nn::Mlp& mlp, nn::MlpCache& cache,
                       int grid) {
  return nn::mlp_forward(mlp, occupancy_grid(mask, grid), cache);
}

std::vector<std::pair<double, double>> resample_trajectory(const bank::HandTrajectory& traj,
                                                           int points) {
  const auto& p = traj.points;
  if (p.size() < 2) throw Error(ErrorCode::kTooFewPoints, "trajectory needs >= 2 points");
  if (points < 2) throw Error(ErrorCode::kInvalidArgument, "resample count must be >= 2");

  std::vector<double> cumulative(p.size(), 0.0);
  for (std::size_t i = 1; i < p.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + std::hypot(p[i].x - p[i - 1].x, p[i].y - p[i - 1].y);
  }
  const double total = cumulative.back();
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(points));
  std::size_t seg = 0;
  for (int k = 0; k < points; ++k) {
    if (total == 0.0) {
      out.emplace_back(p.front().x, p.front().y);
      continue;
    }
    const double s = total * k / (points - 1);
    while (seg + 2 < p.size() && cumulative[seg + 1] < s) ++seg;
    const double len = cumulative[seg + 1] - cumulative[seg];
    const double t = len > 0.0 ? std::clamp((s - cumulative[seg]) / len, 0.0, 1.0) : 0.0;
    out.emplace_back(p[seg].x + t * (p[seg + 1].x - p[seg].x),
                     p[seg].y + t * (p[seg + 1].y - p[seg].y));
  }
  return out;
}

nn::Tensor trajectory_vector(const bank::HandTrajectory& traj, int width, int height, int points) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::kInvalidArgument, "frame dims");
  const auto resampled = resample_trajectory(traj, points);
  nn::Tensor v(1, static_cast<std::size_t>(2 * points));
  for (std::size_t i = 0; i < resampled.size(); ++i) {
    v(0, 2 * i) = resampled[i].first / width;
    v(0, 2 * i + 1) = resampled[i].second / height;
  }
  return v;
}

nn::Tensor encode_trajectory(const bank::HandTrajectory& traj, int width, int height,
                             const nn::Mlp& mlp, nn::MlpCache& cache, int points) {
  return nn::mlp_forward(mlp, trajectory_vector(traj, width, height, points), cache);
}

namespace {

void append_rows(TokenSequence& seq, const nn::Tensor& rows, Segment segment,
                 const std::vector<double>* sizes, std::vector<nn::Tensor>& parts) {
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    seq.sizes.push_back(sizes ? (*sizes)[i] : 1.0);
    seq.segments.push_back(segment);
    seq.owners.push_back(-1);
  }
  parts.push_back(rows);
}

void number_positions(TokenSequence& seq) {
  seq.positions.resize(seq.vectors.rows());
  for (std::size_t i = 0; i < seq.positions.size(); ++i) seq.positions[i] = static_cast<int>(i);
}

}  // namespace

TokenSequence assemble_memory(const nn::Tensor& text, const nn::Tensor& state,
                              const TokenSequence& video, const nn::Tensor& mask,
                              const nn::Tensor& traj) {
  const std::size_t d = state.cols();
  for (const nn::Tensor* t : {&text, &video.vectors, &mask, &traj}) {
    if (t->cols() != d) throw Error(ErrorCode::kDimMismatch, "memory token widths differ");
  }
  if (state.rows() != 1 || mask.rows() != 1 || traj.rows() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "state/mask/traj must be single tokens");
  }
  if (text.rows() == 0 || video.vectors.rows() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "memory needs text and video tokens");
  }
  TokenSequence seq;
  std::vector<nn::Tensor> parts;
  append_rows(seq, text, Segment::kText, nullptr, parts);
  append_rows(seq, state, Segment::kState, nullptr, parts);
  append_rows(seq, video.vectors, Segment::kVideo, &video.sizes, parts);
  append_rows(seq, mask, Segment::kMask, nullptr, parts);
  append_rows(seq, traj, Segment::kTraj, nullptr, parts);
  seq.vectors = nn::vstack(parts);
  number_positions(seq);
  return seq;
}

void sort_memories(std::vector<MemoryFeature>& memories) {
  std::sort(memories.begin(), memories.end(), [](const MemoryFeature& a, const MemoryFeature& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.entry_id < b.entry_id;
  });
}

TokenSequence concat_memories(std::vector<MemoryFeature> memories, const nn::Tensor& sep) {
  sort_memories(memories);
  TokenSequence seq;
  std::vector<nn::Tensor> parts;
  for (std::size_t m = 0; m < memories.size(); ++m) {
    if (m > 0) append_rows(seq, sep, Segment::kSep, nullptr, parts);
    const TokenSequence& src = memories[m].tokens;
    parts.push_back(src.vectors);
    seq.sizes.insert(seq.sizes.end(), src.sizes.begin(), src.sizes.end());
    seq.segments.insert(seq.segments.end(), src.segments.begin(), src.segments.end());
    seq.owners.insert(seq.owners.end(), src.length(), static_cast<int>(m));
  }
  if (!parts.empty()) seq.vectors = nn::vstack(parts);
  number_positions(seq);
  return seq;
}

}  // namespace rfv::encoders
