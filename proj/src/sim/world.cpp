#include "rfv/sim/world.hpp"

#include <algorithm>
#include <cmath>

#include "rfv/core/error.hpp"

namespace rfv::sim {

std::string_view object_kind_name(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kBall: return "ball";
    case ObjectKind::kCube: return "cube";
    case ObjectKind::kBlock: return "block";
    case ObjectKind::kBox: return "box";
  }
  return "?";
}

Shape shape_of(ObjectKind kind) { return kind == ObjectKind::kBall ? Shape::kDisc : Shape::kRect; }

const std::vector<Color>& palette() {
  static const std::vector<Color> colors{
      {"red", {220, 40, 40}},     {"green", {40, 180, 60}},  {"blue", {40, 70, 220}},
      {"yellow", {230, 210, 40}}, {"purple", {150, 60, 190}}, {"orange", {240, 140, 30}},
      {"cyan", {40, 200, 210}},   {"pink", {240, 130, 190}},
  };
  return colors;
}

const std::vector<Landmark>& landmarks() {
  static const std::vector<Landmark> table{
      {"lamp", 0.29, 0.54}, {"book", 0.40, 0.58}, {"phone", 0.60, 0.15},
      {"clock", 0.11, 0.77}, {"radio", 0.31, 0.29}, {"bowl", 0.90, 0.48},
      {"toaster", 0.77, 0.48}, {"laptop", 0.61, 0.79}, {"basket", 0.52, 0.69},
      {"stapler", 0.34, 0.12}, {"fridge", 0.42, 0.74}, {"chair", 0.46, 0.85},
      {"shelf", 0.80, 0.18}, {"monitor", 0.60, 0.34}, {"jar", 0.51, 0.41},
      {"pillow", 0.79, 0.89}, {"mirror", 0.43, 0.22}, {"heater", 0.26, 0.43},
      {"sofa", 0.35, 0.87}, {"table", 0.62, 0.58}, {"stool", 0.12, 0.59},
      {"rug", 0.67, 0.69}, {"sock", 0.12, 0.15}, {"bucket", 0.74, 0.29},
      {"broom", 0.75, 0.77}, {"brush", 0.75, 0.61}, {"wallet", 0.20, 0.33},
      {"map", 0.38, 0.43}, {"camera", 0.24, 0.73}, {"tablet", 0.72, 0.10},
      {"charger", 0.88, 0.78}, {"cable", 0.21, 0.89},
  };
  return table;
}

int WorldState::held_index() const {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].held) return static_cast<int>(i);
  }
  return -1;
}

std::array<double, 2> slot_center(int slot) {
  if (slot < 0 || slot >= kSlotGrid * kSlotGrid) throw Error(ErrorCode::kInvalidArgument, "slot index");
  const double cell = 1.0 / kSlotGrid;
  return {cell * (slot % kSlotGrid + 0.5), cell * (slot / kSlotGrid + 0.5)};
}

namespace {

double wrap_angle(double a) {
  constexpr double kPi = 3.14159265358979323846;
  while (a > kPi) a -= 2 * kPi;
  while (a < -kPi) a += 2 * kPi;
  return a;
}

}  // namespace

WorldState step_dynamics(const WorldState& state, const std::vector<double>& action,
                         const DynamicsOptions& options) {
  if (action.size() != kDof) throw Error(ErrorCode::kDimMismatch, "action needs 4 values");
  for (double v : action) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "action must be finite");
  }
  WorldState next = state;
  Effector& e = next.effector;
  const double tx = std::clamp(action[0], 0.0, 1.0);
  const double ty = std::clamp(action[1], 0.0, 1.0);
  const double dx = tx - e.x, dy = ty - e.y;
  const double dist = std::hypot(dx, dy);
  if (dist <= options.max_speed) {
    e.x = tx;
    e.y = ty;
  } else {
    e.x += dx * options.max_speed / dist;
    e.y += dy * options.max_speed / dist;
  }
  const double dyaw = wrap_angle(action[3] - e.yaw);
  e.yaw = wrap_angle(e.yaw + std::clamp(dyaw, -kMaxYawRate, kMaxYawRate));

  e.gripper = std::clamp(action[2], 0.0, 1.0);
  const bool closed = e.gripper >= 0.5;

  const int held = next.held_index();
  if (held >= 0) {
    Object& o = next.objects[static_cast<std::size_t>(held)];
    o.x = std::clamp(e.x + o.grasp_dx, 0.0, 1.0);
    o.y = std::clamp(e.y + o.grasp_dy, 0.0, 1.0);
    o.yaw = e.yaw;
    if (!closed) o.held = false;
  } else if (closed) {
    int best = -1;
    double best_d = kGraspRadius;
    for (std::size_t i = 0; i < next.objects.size(); ++i) {
      const Object& o = next.objects[i];
      if (o.kind != ObjectKind::kCube && o.kind != ObjectKind::kBlock) continue;
      const double d = std::hypot(o.x - e.x, o.y - e.y);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    if (best >= 0) {
      Object& o = next.objects[static_cast<std::size_t>(best)];
      o.held = true;
      if (o.kind == ObjectKind::kCube) {
        o.x = e.x;
        o.y = e.y;
        o.grasp_dx = o.grasp_dy = 0.0;
      } else {
        o.grasp_dx = o.x - e.x;
        o.grasp_dy = o.y - e.y;
      }
    }
  }
  next.step = state.step + 1;
  return next;
}

std::vector<double> proprio(const WorldState& state) {
  const Effector& e = state.effector;
  return {e.x, e.y, e.gripper, e.yaw};
}

namespace {

bool inside(const Object& o, double px, double py) {
  if (shape_of(o.kind) == Shape::kDisc) return std::hypot(px - o.x, py - o.y) <= o.half_w;
  const double c = std::cos(-o.yaw), s = std::sin(-o.yaw);
  const double lx = c * (px - o.x) - s * (py - o.y);
  const double ly = s * (px - o.x) + c * (py - o.y);
  return std::abs(lx) <= o.half_w && std::abs(ly) <= o.half_h;
}

bool on_outline(const Object& o, double px, double py, double thickness) {
  const double lx = std::abs(px - o.x), ly = std::abs(py - o.y);
  const bool within = lx <= o.half_w && ly <= o.half_h;
  return within && (lx >= o.half_w - thickness || ly >= o.half_h - thickness);
}

void put(bank::Frame& f, int x, int y, const std::array<std::uint8_t, 3>& rgb) {
  if (x < 0 || y < 0 || x >= f.width || y >= f.height) return;
  for (int c = 0; c < 3; ++c) f.at(x, y, c) = rgb[static_cast<std::size_t>(c)];
}

constexpr std::array<std::uint8_t, 3> kBackground{190, 190, 185};
constexpr std::array<std::uint8_t, 3> kBoxColor{120, 80, 40};
constexpr std::array<std::uint8_t, 3> kEffectorColor{25, 25, 25};
constexpr std::array<std::uint8_t, 3> kHandColor{235, 190, 150};

}  // namespace

bank::Frame render(const WorldState& state, int width, int height, const RenderOptions& options) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::kInvalidArgument, "render size");
  bank::Frame f(width, height, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) put(f, x, y, kBackground);

  auto pixel_center = [&](int x, int y) {
    return std::array<double, 2>{(x + 0.5) / width, (y + 0.5) / height};
  };
  // Boxes first, then loose objects, then the held object and the effector.
  for (int pass = 0; pass < 3; ++pass) {
    for (const Object& o : state.objects) {
      const int want = o.kind == ObjectKind::kBox ? 0 : (o.held ? 2 : 1);
      if (want != pass) continue;
      const auto& rgb = o.kind == ObjectKind::kBox ? kBoxColor : palette()[static_cast<std::size_t>(o.color)].rgb;
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          const auto [px, py] = pixel_center(x, y);
          const bool hit = o.kind == ObjectKind::kBox ? on_outline(o, px, py, 1.5 / width) : inside(o, px, py);
          if (hit) put(f, x, y, rgb);
        }
      }
    }
  }
  if (options.draw_effector) {
    const int cx = static_cast<int>(std::floor(state.effector.x * width));
    const int cy = static_cast<int>(std::floor(state.effector.y * height));
    if (options.human_hand) {
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) put(f, cx + dx, cy + dy, kHandColor);
    } else if (state.effector.gripper >= 0.5) {
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) put(f, cx + dx, cy + dy, kEffectorColor);
    } else {
      for (int d = -1; d <= 1; ++d) {
        put(f, cx + d, cy, kEffectorColor);
        put(f, cx, cy + d, kEffectorColor);
      }
    }
  }
  return f;
}

bank::Frame robot_view(const WorldState& state) {
  RenderOptions options;
  options.draw_effector = false;
  return render(state, kRenderSize, kRenderSize, options);
}

std::vector<std::uint8_t> render_silhouette(const Object& object, int width, int height) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(width * height), 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (inside(object, (x + 0.5) / width, (y + 0.5) / height)) bits[static_cast<std::size_t>(y * width + x)] = 1;
    }
  }
  return bits;
}

}  // namespace rfv::sim
