#include "rfv/midlevel/midlevel.hpp"

#include <cmath>
#include <string>

#include "rfv/bank/rle.hpp"
#include "rfv/core/error.hpp"
#include "rfv/midlevel/spline.hpp"

namespace rfv::midlevel {
namespace {

// Pixel index range whose centers fall in [lo, hi).
std::pair<std::int64_t, std::int64_t> center_range(double lo, double hi) {
  const auto first = static_cast<std::int64_t>(std::ceil(lo - 0.5));
  const auto last = static_cast<std::int64_t>(std::ceil(hi - 0.5));  // exclusive
  return {first, std::max(first, last)};
}

}  // namespace

std::int64_t BoundingBox::pixel_area() const {
  const auto [x0, x1] = center_range(x_min, x_max);
  const auto [y0, y1] = center_range(y_min, y_max);
  return (x1 - x0) * (y1 - y0);
}

double contact_overlap(const BoundingBox& hand, const Bitmap& object, int width, int height) {
  const std::int64_t area = hand.pixel_area();
  if (area <= 0) return 0.0;
  auto [x0, x1] = center_range(hand.x_min, hand.x_max);
  auto [y0, y1] = center_range(hand.y_min, hand.y_max);
  x0 = std::max<std::int64_t>(x0, 0);
  y0 = std::max<std::int64_t>(y0, 0);
  x1 = std::min<std::int64_t>(x1, width);
  y1 = std::min<std::int64_t>(y1, height);
  std::int64_t hits = 0;
  for (std::int64_t y = y0; y < y1; ++y) {
    for (std::int64_t x = x0; x < x1; ++x) {
      if (object[static_cast<std::size_t>(y * width + x)] != 0) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(area);
}

int detect_contact_keyframe(const DetectionTrack& track, double iou_threshold) {
  if (track.objects.size() != track.hands.size()) {
    throw Error(ErrorCode::kShapeMismatch, "hand and object tracks differ in length");
  }
  const std::size_t pixels = static_cast<std::size_t>(track.width) * track.height;
  for (std::size_t f = 0; f < track.num_frames(); ++f) {
    if (!track.hands[f] || !track.objects[f]) continue;
    if (track.objects[f]->size() != pixels) {
      throw Error(ErrorCode::kShapeMismatch, "object bitmap size at frame " + std::to_string(f));
    }
    if (contact_overlap(*track.hands[f], *track.objects[f], track.width, track.height) >=
        iou_threshold) {
      return static_cast<int>(f);
    }
  }
  throw Error(ErrorCode::kNoContactFound, "no frame reaches overlap " + std::to_string(iou_threshold));
}

std::pair<double, double> bbox_centroid(const BoundingBox& box) {
  return {(box.x_min + box.x_max) / 2.0, (box.y_min + box.y_max) / 2.0};
}

bank::HandTrajectory raw_trajectory(const DetectionTrack& track, int keyframe) {
  bank::HandTrajectory traj;
  for (std::size_t f = static_cast<std::size_t>(std::max(keyframe, 0)); f < track.num_frames(); ++f) {
    if (!track.hands[f]) continue;
    const auto [x, y] = bbox_centroid(*track.hands[f]);
    traj.points.push_back({static_cast<int>(f), x, y});
  }
  if (traj.points.size() < 2) {
    throw Error(ErrorCode::kInsufficientPoints,
                std::to_string(traj.points.size()) + " hand boxes at/after keyframe");
  }
  return traj;
}

bank::HandTrajectory smooth_trajectory(const bank::HandTrajectory& trajectory, double lambda) {
  const auto& pts = trajectory.points;
  if (pts.size() < 4) {
    throw Error(ErrorCode::kTooFewPoints, std::to_string(pts.size()) + " points, need 4");
  }
  std::vector<double> t, xs, ys;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0 && pts[i].frame_index <= pts[i - 1].frame_index) {
      throw Error(ErrorCode::kNonMonotonicTime, "frame " + std::to_string(pts[i].frame_index));
    }
    t.push_back(pts[i].frame_index);
    xs.push_back(pts[i].x);
    ys.push_back(pts[i].y);
  }
  const SmoothingSpline fx(t, xs, lambda);
  const SmoothingSpline fy(t, ys, lambda);

  bank::HandTrajectory out;
  out.smoothed = true;
  for (int f = pts.front().frame_index; f <= pts.back().frame_index; ++f) {
    out.points.push_back({f, fx(f), fy(f)});
  }
  return out;
}

double trajectory_roughness(const bank::HandTrajectory& trajectory) {
  const auto& p = trajectory.points;
  double total = 0.0;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    const double dx = p[i + 1].x - 2.0 * p[i].x + p[i - 1].x;
    const double dy = p[i + 1].y - 2.0 * p[i].y + p[i - 1].y;
    total += dx * dx + dy * dy;
  }
  return total;
}

std::vector<int> label_components(const Bitmap& bitmap, int width, int height,
                                  int* num_components) {
  std::vector<int> labels(bitmap.size(), -1);
  int next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < bitmap.size(); ++start) {
    if (bitmap[start] == 0 || labels[start] != -1) continue;
    labels[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(idx % static_cast<std::size_t>(width));
      const int y = static_cast<int>(idx / static_cast<std::size_t>(width));
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= width || ny[k] >= height) continue;
        const std::size_t n = static_cast<std::size_t>(ny[k]) * width + nx[k];
        if (bitmap[n] != 0 && labels[n] == -1) {
          labels[n] = next;
          stack.push_back(n);
        }
      }
    }
    ++next;
  }
  if (num_components) *num_components = next;
  return labels;
}

MaskSelection build_affordance_mask(const Bitmap& object, int width, int height,
                                    const BoundingBox& hand, int keyframe) {
  if (width <= 0 || height <= 0 || object.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kShapeMismatch, "bitmap does not match clip dimensions");
  }
  int count = 0;
  const auto labels = label_components(object, width, height, &count);
  if (count == 0) throw Error(ErrorCode::kEmptyBitmap, "object bitmap has no foreground");

  std::vector<std::int64_t> overlap(count, 0), size(count, 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int label = labels[static_cast<std::size_t>(y) * width + x];
      if (label < 0) continue;
      ++size[label];
      if (hand.contains_pixel(x, y)) ++overlap[label];
    }
  }
  MaskSelection sel;
  int best = 0;
  for (int c = 1; c < count; ++c) {
    if (overlap[c] > overlap[best]) best = c;
  }
  if (overlap[best] == 0) {
    sel.fell_back = true;
    best = 0;
    for (int c = 1; c < count; ++c) {
      if (size[c] > size[best]) best = c;
    }
  }
  Bitmap chosen(object.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) chosen[i] = labels[i] == best ? 1 : 0;
  sel.component_id = best;
  sel.mask.keyframe_index = keyframe;
  sel.mask.width = width;
  sel.mask.height = height;
  sel.mask.runs = bank::encode_rle(chosen);
  return sel;
}

}  // namespace rfv::midlevel
