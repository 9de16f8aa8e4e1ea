#include "rfv/sim/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "rfv/core/blob.hpp"
#include "rfv/core/error.hpp"
#include "rfv/core/rng.hpp"

namespace rfv::sim {

using nlohmann::json;

std::vector<Demo> collect_demos(const std::vector<TaskSpec>& specs, int n_per_task, std::uint64_t seed,
                                const ExpertOptions& options) {
  std::vector<Demo> demos;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    for (int i = 0; i < n_per_task; ++i) {
      for (std::uint64_t attempt = 0;; ++attempt) {
        const std::uint64_t episode_seed =
            mix_seed(mix_seed(seed, 0xde40 + s), mix_seed(static_cast<std::uint64_t>(i), attempt));
        try {
          ExpertOptions eo = options;
          eo.noise_seed = mix_seed(options.noise_seed, episode_seed);
          demos.push_back(scripted_expert(generate_task(specs[s], episode_seed), eo));
          break;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kExpertFailure || attempt >= 20) throw;
        }
      }
    }
  }
  return demos;
}

namespace {

std::filesystem::path episode_path(const std::filesystem::path& dir, std::size_t i, const char* ext) {
  char name[64];
  std::snprintf(name, sizeof name, "episode_%04zu%s", i, ext);
  return dir / name;
}

}  // namespace

void save_demos(const std::vector<Demo>& demos, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < demos.size(); ++i) {
    const Demo& d = demos[i];
    if (d.frames.size() != d.actions.size() || d.proprio.size() != d.actions.size()) {
      throw Error(ErrorCode::kShapeMismatch, "demo lengths disagree");
    }
    std::vector<std::uint8_t> bytes;
    for (const auto& f : d.frames) bytes.insert(bytes.end(), f.data.begin(), f.data.end());
    write_blob(episode_path(dir, i, ".frames.rfvb"), BlobDtype::kU8, bytes);
    json j;
    j["instruction"] = d.instruction;
    j["task"] = std::string(task_type_name(d.task_type));
    j["success"] = d.success;
    j["width"] = d.frames.empty() ? 0 : d.frames.front().width;
    j["height"] = d.frames.empty() ? 0 : d.frames.front().height;
    j["proprio"] = d.proprio;
    j["actions"] = d.actions;
    const std::string text = j.dump(1) + "\n";
    write_file_bytes(episode_path(dir, i, ".json"),
                     std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
}

std::vector<Demo> load_demos(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::kIoError, "no demo directory " + dir.string());
  std::vector<Demo> demos;
  for (std::size_t i = 0;; ++i) {
    const auto meta = episode_path(dir, i, ".json");
    if (!std::filesystem::exists(meta)) break;
    const auto raw = read_file_bytes(meta);
    json j;
    try {
      j = json::parse(raw.begin(), raw.end());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kCorruptManifest, meta.string() + ": " + e.what());
    }
    Demo d;
    try {
      d.instruction = j.at("instruction").get<std::string>();
      d.task_type = parse_task_type(j.at("task").get<std::string>());
      d.success = j.at("success").get<bool>();
      d.proprio = j.at("proprio").get<std::vector<std::vector<double>>>();
      d.actions = j.at("actions").get<std::vector<std::vector<double>>>();
      const int w = j.at("width").get<int>(), h = j.at("height").get<int>();
      const Blob blob = read_blob(episode_path(dir, i, ".frames.rfvb"));
      const std::size_t frame_bytes = static_cast<std::size_t>(w) * h * 3;
      if (blob.dtype != BlobDtype::kU8 || blob.payload.size() != frame_bytes * d.actions.size()) {
        throw Error(ErrorCode::kCorruptManifest, "frame blob size mismatch in episode " + std::to_string(i));
      }
      for (std::size_t f = 0; f < d.actions.size(); ++f) {
        bank::Frame frame(w, h, 3);
        std::copy_n(blob.payload.begin() + static_cast<std::ptrdiff_t>(f * frame_bytes), frame_bytes,
                    frame.data.begin());
        d.frames.push_back(std::move(frame));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kCorruptManifest, meta.string() + ": " + e.what());
    }
    if (d.proprio.size() != d.actions.size()) throw Error(ErrorCode::kCorruptManifest, "demo lengths disagree");
    demos.push_back(std::move(d));
  }
  return demos;
}

namespace {

void push_demo_samples(const Demo& d, const std::vector<bank::Frame>& frames,
                       const std::shared_ptr<const std::vector<policy::MemoryInput>>& mems,
                       const policy::PolicyConfig& config, double dx, double dy,
                       std::vector<policy::TrainingSample>& out) {
  for (std::size_t t = 0; t < d.actions.size(); ++t) {
    std::vector<double> prop = d.proprio[t];
    prop.at(0) += dx;
    prop.at(1) += dy;
    policy::RobotObservation obs{{frames[t]}, std::move(prop), d.instruction};
    policy::TrainingSample s;
    s.obs = policy::prepare_observation(obs, config);
    s.memories = mems;
    s.target.actions = nn::Tensor(config.horizon, config.dof);
    for (std::size_t h = 0; h < config.horizon; ++h) {
      const auto& a = d.actions[std::min(t + h, d.actions.size() - 1)];
      if (a.size() != config.dof) throw Error(ErrorCode::kDimMismatch, "action width differs from dof");
      for (std::size_t c = 0; c < config.dof; ++c) s.target.actions(h, c) = a[c];
      s.target.actions(h, 0) += dx;
      s.target.actions(h, 1) += dy;
    }
    out.push_back(std::move(s));
  }
}

// Largest shift range along each axis that keeps every effector position,
// object extent and commanded target of the demo inside the unit square.
std::array<std::array<double, 2>, 2> shift_bounds(const Demo& d, double span) {
  double lo[2] = {1.0, 1.0}, hi[2] = {0.0, 0.0};
  auto cover = [&](double x0, double y0, double x1, double y1) {
    lo[0] = std::min(lo[0], x0);
    lo[1] = std::min(lo[1], y0);
    hi[0] = std::max(hi[0], x1);
    hi[1] = std::max(hi[1], y1);
  };
  for (const WorldState& st : d.states) {
    cover(st.effector.x, st.effector.y, st.effector.x, st.effector.y);
    for (const Object& o : st.objects) cover(o.x - o.half_w, o.y - o.half_h, o.x + o.half_w, o.y + o.half_h);
  }
  for (const auto& a : d.actions) cover(a[0], a[1], a[0], a[1]);
  std::array<std::array<double, 2>, 2> b{};
  for (int k = 0; k < 2; ++k) b[static_cast<std::size_t>(k)] = {std::max(-span, -lo[k]), std::min(span, 1.0 - hi[k])};
  return b;
}

}  // namespace

std::vector<policy::TrainingSample> training_samples(const std::vector<Demo>& demos,
                                                     const policy::PolicyConfig& config,
                                                     const policy::MemoryContext* memory,
                                                     const AugmentOptions& augment) {
  if (augment.copies < 0 || !(augment.span >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "augment options");
  std::vector<policy::TrainingSample> samples;
  Rng rng(mix_seed(augment.seed, 0xa06));
  for (const Demo& d : demos) {
    std::shared_ptr<const std::vector<policy::MemoryInput>> mems;
    if (config.use_retrieval && memory != nullptr) mems = memory->retrieve(d.instruction, config.k_retrieved);
    push_demo_samples(d, d.frames, mems, config, 0.0, 0.0, samples);
    if (augment.copies == 0) continue;
    if (d.states.size() != d.actions.size() + 1) {
      throw Error(ErrorCode::kInvalidArgument, "augmentation needs the demo's world states");
    }
    const auto bounds = shift_bounds(d, augment.span);
    for (int c = 0; c < augment.copies; ++c) {
      double shift[2];
      for (std::size_t k = 0; k < 2; ++k) {
        const auto [a, b] = bounds[k];
        shift[k] = a < b ? rng.uniform(a, b) : 0.0;
      }
      std::vector<bank::Frame> frames;
      frames.reserve(d.actions.size());
      for (std::size_t t = 0; t < d.actions.size(); ++t) {
        WorldState st = d.states[t];
        st.effector.x += shift[0];
        st.effector.y += shift[1];
        for (Object& o : st.objects) {
          o.x += shift[0];
          o.y += shift[1];
        }
        frames.push_back(robot_view(st));
      }
      std::shared_ptr<const std::vector<policy::MemoryInput>> moved;
      if (mems) {
        auto copy = std::make_shared<std::vector<policy::MemoryInput>>(*mems);
        for (policy::MemoryInput& m : *copy) {
          for (std::size_t j = 0; j < m.trajectory.cols(); ++j) m.trajectory(0, j) += shift[j % 2];
        }
        moved = std::move(copy);
      }
      push_demo_samples(d, frames, moved, config, shift[0], shift[1], samples);
    }
  }
  return samples;
}

}  // namespace rfv::sim
