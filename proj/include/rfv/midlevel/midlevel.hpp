#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rfv/bank/types.hpp"

namespace rfv::midlevel {

struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool valid() const { return x_min < x_max && y_min < y_max; }
  // Pixel (px, py) is inside when its center lies in [min, max).
  bool contains_pixel(int px, int py) const {
    const double cx = px + 0.5;
    const double cy = py + 0.5;
    return cx >= x_min && cx < x_max && cy >= y_min && cy < y_max;
  }
  // Number of integer-grid pixel centers inside the box (unclipped).
  std::int64_t pixel_area() const;
};

using Bitmap = std::vector<std::uint8_t>;  // row-major, nonzero = foreground

// Per-frame detector/segmenter outputs for one clip.
struct DetectionTrack {
  int width = 0;
  int height = 0;
  std::vector<std::optional<BoundingBox>> hands;
  std::vector<std::optional<Bitmap>> objects;

  std::size_t num_frames() const { return hands.size(); }
};

inline constexpr double kDefaultContactThreshold = 0.1;
inline constexpr double kDefaultSmoothingLambda = 1.0;

// Fraction of the hand box's pixels that are object foreground.
double contact_overlap(const BoundingBox& hand, const Bitmap& object, int width, int height);

int detect_contact_keyframe(const DetectionTrack& track,
                            double iou_threshold = kDefaultContactThreshold);

std::pair<double, double> bbox_centroid(const BoundingBox& box);

bank::HandTrajectory raw_trajectory(const DetectionTrack& track, int keyframe);

// Cubic smoothing spline per coordinate, minimising
//   sum_i (y_i - f(t_i))^2 + lambda * integral f''(t)^2 dt
// over frame-index time, resampled at every integer frame in [first, last].
bank::HandTrajectory smooth_trajectory(const bank::HandTrajectory& trajectory, double lambda);

// Sum of squared second differences of x and y over consecutive points.
double trajectory_roughness(const bank::HandTrajectory& trajectory);

struct MaskSelection {
  bank::AffordanceMask mask;
  int component_id = -1;      // scan-order id of the chosen component
  bool fell_back = false;     // no component touched the hand box
};

// Picks the 4-connected component of `object` with the largest pixel overlap
// with `hand` (ties -> lower scan-order id); if nothing overlaps, the largest
// component is used and fell_back is set.
MaskSelection build_affordance_mask(const Bitmap& object, int width, int height,
                                    const BoundingBox& hand, int keyframe);

// 4-connected component labelling. Background pixels get -1; ids are assigned
// in row-major scan order of each component's first pixel.
std::vector<int> label_components(const Bitmap& bitmap, int width, int height,
                                  int* num_components = nullptr);

}  // namespace rfv::midlevel
