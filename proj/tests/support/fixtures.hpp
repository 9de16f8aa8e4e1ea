#pragma once

#include <cmath>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "rfv/bank/bank.hpp"
#include "rfv/bank/rle.hpp"
#include "rfv/core/rng.hpp"

namespace rfv::testing {

// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("rfv_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline bank::Frame random_frame(Rng& rng, int w, int h) {
  bank::Frame f(w, h, 3);
  for (auto& v : f.data) v = static_cast<std::uint8_t>(rng.below(256));
  return f;
}

inline std::vector<std::uint8_t> random_bitmap(Rng& rng, std::size_t n, double p) {
  std::vector<std::uint8_t> bits(n);
  for (auto& b : bits) b = rng.bernoulli(p) ? 1 : 0;
  return bits;
}

// A small valid entry: 4 frames of 8x8, a 2x2 mask, 4-point trajectory.
inline bank::BankEntry make_entry(const std::string& id, const std::string& text,
                                  std::uint64_t seed = 1, const std::string& view = "") {
  Rng rng(seed);
  auto clip = std::make_shared<bank::VideoClip>();
  clip->clip_id = "clip_" + id;
  clip->fps = 10.0;
  clip->view_id = view;
  for (int i = 0; i < 4; ++i) clip->frames.push_back(random_frame(rng, 8, 8));

  std::vector<std::uint8_t> bitmap(64, 0);
  bitmap[2 * 8 + 2] = bitmap[2 * 8 + 3] = bitmap[3 * 8 + 2] = bitmap[3 * 8 + 3] = 1;

  bank::BankEntry e;
  e.entry_id = id;
  e.narration = {text, true};
  e.clip = clip;
  e.mask = {0, 8, 8, bank::encode_rle(bitmap)};
  for (int i = 0; i < 4; ++i) {
    e.trajectory.points.push_back({i, 2.0 + i * 0.5 + rng.uniform(), 3.0 + i * 0.25});
  }
  e.trajectory.smoothed = true;
  return e;
}

inline double max_rel_error(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

}  // namespace rfv::testing
