#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rfv::bank {

struct Frame {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> data;  // row-major, interleaved channels

  Frame() = default;
  Frame(int w, int h, int c = 3)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, 0) {}

  std::uint8_t& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool operator==(const Frame&) const = default;
};

struct VideoClip {
  std::string clip_id;
  std::vector<Frame> frames;
  double fps = 30.0;
  std::string view_id;  // empty: not tied to a camera view

  int width() const { return frames.empty() ? 0 : frames.front().width; }
  int height() const { return frames.empty() ? 0 : frames.front().height; }
  bool operator==(const VideoClip&) const = default;
};

struct Narration {
  std::string text;
  bool indoor = true;
  bool operator==(const Narration&) const = default;
};

// Row-major RLE over a binary keyframe bitmap. runs[0] is background and may
// be zero; runs then alternate foreground/background.
struct AffordanceMask {
  int keyframe_index = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> runs;
  bool operator==(const AffordanceMask&) const = default;
};

struct TrajectoryPoint {
  int frame_index = 0;
  double x = 0.0;
  double y = 0.0;
  bool operator==(const TrajectoryPoint&) const = default;
};

struct HandTrajectory {
  std::vector<TrajectoryPoint> points;
  bool smoothed = false;
  bool operator==(const HandTrajectory&) const = default;
};

struct BankEntry {
  std::string entry_id;
  Narration narration;
  std::shared_ptr<const VideoClip> clip;
  AffordanceMask mask;
  HandTrajectory trajectory;
  std::optional<std::vector<float>> embedding;
  // One feature vector per clip frame.
  std::optional<std::vector<std::vector<float>>> frame_features;
};

// Field-for-field equality, comparing clip contents rather than pointers and
// float payloads bitwise.
bool entries_equal(const BankEntry& a, const BankEntry& b);

}  // namespace rfv::bank
