#include "rfv/sim/human_bank.hpp"

#include <cmath>
#include <cstdio>

#include "rfv/core/error.hpp"
#include "rfv/core/rng.hpp"

namespace rfv::sim {

namespace {

std::vector<std::size_t> subsample(std::size_t n, std::size_t cap) {
  std::vector<std::size_t> idx;
  if (n <= cap) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    return idx;
  }
  for (std::size_t i = 0; i < cap; ++i) {
    idx.push_back(static_cast<std::size_t>(std::llround(static_cast<double>(i) * (n - 1) / (cap - 1))));
  }
  return idx;
}

}  // namespace

midlevel::IngestRecord human_record(const TaskInstance& task, const std::string& entry_id,
                                    std::uint64_t seed, const HumanBankOptions& options) {
  ExpertOptions eo;
  eo.speed = kHumanSpeed;
  eo.human_hand = true;
  eo.goal_noise = options.goal_noise;
  eo.noise_seed = seed;
  eo.linger_steps = task.spec.type == TaskType::kReach ? options.reach_linger : 0;
  const Demo demo = scripted_expert(task, eo);

  RenderOptions ro;
  ro.human_hand = true;
  const int w = kRenderSize, h = kRenderSize;
  auto clip = std::make_shared<bank::VideoClip>();
  clip->clip_id = entry_id;
  clip->fps = 10.0;
  clip->view_id = "top";

  midlevel::IngestRecord rec;
  rec.entry_id = entry_id;
  rec.narration = {narration_text(task.spec.type, task.color, task.landmark), true};
  rec.track.width = w;
  rec.track.height = h;
  for (std::size_t i : subsample(demo.states.size(), static_cast<std::size_t>(options.max_frames))) {
    const WorldState& s = demo.states[i];
    clip->frames.push_back(render(s, w, h, ro));
    const double cx = std::floor(s.effector.x * w), cy = std::floor(s.effector.y * h);
    rec.track.hands.push_back(midlevel::BoundingBox{cx - 1, cy - 1, cx + 2, cy + 2});
    rec.track.objects.push_back(render_silhouette(s.objects[static_cast<std::size_t>(task.target_object)], w, h));
  }
  rec.clip = std::move(clip);
  return rec;
}

bank::Bank synthesize_human_bank(const std::vector<TaskSpec>& specs, int n_per_task,
                                 std::uint64_t seed, const HumanBankOptions& options) {
  if (n_per_task < 0) throw Error(ErrorCode::kInvalidArgument, "n_per_task must be >= 0");
  bank::Bank bank;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const TaskSpec& base = specs[s];
    for (int i = 0; i < n_per_task; ++i) {
      TaskSpec spec = base;
      if (uses_landmark(spec.type) && !spec.landmark_ids.empty()) {
        const int id = base.landmark_ids[static_cast<std::size_t>(i) % base.landmark_ids.size()];
        spec.landmark_ids = {id};
        const Landmark& l = landmarks().at(static_cast<std::size_t>(id));
        const double clearance = kMinGoalDistance + std::sqrt(2.0) * spec.spawn_jitter;
        std::vector<int> slots;
        for (int slot : base.spawn_slots) {
          const auto c = slot_center(slot);
          if (std::hypot(c[0] - l.x, c[1] - l.y) >= clearance) slots.push_back(slot);
        }
        if (!slots.empty()) spec.spawn_slots = slots;
      }
      char id[96];
      std::snprintf(id, sizeof id, "human_%s_%04d", base.name.c_str(), i);
      for (std::uint64_t attempt = 0;; ++attempt) {
        const std::uint64_t episode_seed = mix_seed(mix_seed(seed, s), mix_seed(static_cast<std::uint64_t>(i), attempt));
        try {
          const TaskInstance task = generate_task(spec, episode_seed);
          bank.add_entry(midlevel::annotate(human_record(task, id, episode_seed, options), options.annotation).entry);
          break;
        } catch (const Error& e) {
          if (attempt >= 20) throw;
          const ErrorCode c = e.code();
          if (c != ErrorCode::kExpertFailure && c != ErrorCode::kNoContactFound &&
              c != ErrorCode::kTooFewPoints && c != ErrorCode::kInsufficientPoints &&
              c != ErrorCode::kInvariantViolation) {
            throw;
          }
        }
      }
    }
  }
  return bank;
}

}  // namespace rfv::sim
