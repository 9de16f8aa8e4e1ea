#include "rfv/policy/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "rfv/core/error.hpp"
#include "rfv/core/rng.hpp"
#include "rfv/encoders/encoders.hpp"
#include "rfv/encoders/featurizer.hpp"
#include "rfv/encoders/tome.hpp"
#include "rfv/retriever/embedder.hpp"

namespace rfv::policy {

using encoders::Segment;
using nn::Tensor;

namespace {

enum RobotSegmentRow : std::size_t { kRobotVideo = 0, kRobotProprio = 1, kRobotText = 2 };

std::size_t memory_segment_row(Segment s) {
  switch (s) {
    case Segment::kText: return 0;
    case Segment::kState: return 1;
    case Segment::kVideo: return 2;
    case Segment::kMask: return 3;
    case Segment::kTraj: return 4;
    case Segment::kSep: return 5;
    default: break;
  }
  throw Error(ErrorCode::kInvariantViolation, "segment not valid in memory");
}

std::size_t robot_segment_row(std::size_t i, std::size_t frame_rows) {
  return i < frame_rows ? kRobotVideo : i == frame_rows ? kRobotProprio : kRobotText;
}

constexpr double kMinContrast = 0.01;

void add_row(Tensor& dst, std::size_t r, const double* src) {
  double* d = dst.row(r);
  for (std::size_t c = 0; c < dst.cols(); ++c) d[c] += src[c];
}

// Centres rows [begin, end) on their mean row and scales them to unit RMS, so
// a frame's tokens carry only their contrast with the rest of the frame.
void standardize_rows(Tensor& t, std::size_t begin, std::size_t end) {
  if (end <= begin) return;
  const std::size_t n = end - begin;
  std::vector<double> mean(t.cols(), 0.0);
  for (std::size_t r = begin; r < end; ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) mean[c] += t(r, c) / static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t r = begin; r < end; ++r) {
    for (std::size_t c = 0; c < t.cols(); ++c) {
      t(r, c) -= mean[c];
      sq += t(r, c) * t(r, c);
    }
  }
  const double scale = 1.0 / std::max(std::sqrt(sq / static_cast<double>(n * t.cols())), kMinContrast);
  for (std::size_t r = begin; r < end; ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) t(r, c) *= scale;
}

}  // namespace

Tensor word_embeddings(const std::string& text, std::size_t dim) {
  const auto words = retriever::tokenize(text);
  Tensor out(words.size(), dim);
  retriever::EmbedderConfig cfg;
  cfg.dim = dim;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto e = retriever::embed_text(words[i], cfg);
    std::copy(e.values.begin(), e.values.end(), out.row(i));
  }
  return out;
}

ObservationInput prepare_observation(const RobotObservation& obs, const PolicyConfig& config) {
  if (obs.views.size() != config.views.size()) {
    throw Error(ErrorCode::kDimMismatch, "observation has " + std::to_string(obs.views.size()) +
                                             " views, config expects " +
                                             std::to_string(config.views.size()));
  }
  if (obs.proprio.size() != config.dof) {
    throw Error(ErrorCode::kDimMismatch, "proprio width " + std::to_string(obs.proprio.size()));
  }
  for (double v : obs.proprio) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "proprio must be finite");
  }
  encoders::FeaturizerConfig fc{config.grid, config.d_model, config.featurizer_seed};
  ObservationInput in;
  std::vector<Tensor> parts;
  for (const auto& frame : obs.views) {
    const Tensor projection = encoders::featurizer_projection(fc, frame.channels);
    parts.push_back(encoders::frame_tokens(frame, fc, projection));
  }
  in.frames = nn::vstack(parts);
  in.proprio = Tensor(1, config.dof, std::vector<double>(obs.proprio));
  in.text = word_embeddings(obs.instruction, config.text_dim);
  return in;
}

MemoryInput prepare_memory(const bank::BankEntry& entry, double score, const PolicyConfig& config) {
  encoders::FeaturizerConfig fc{config.grid, config.d_model, config.featurizer_seed};
  MemoryInput m;
  m.entry_id = entry.entry_id;
  m.score = score;
  m.text = word_embeddings(entry.narration.text, config.text_dim);
  const auto frames = entry.frame_features ? encoders::frame_features(*entry.frame_features, fc)
                                           : encoders::frame_features(*entry.clip, fc);
  m.video = encoders::reduce_tokens(frames, config.keep_fraction);
  m.occupancy = encoders::occupancy_grid(entry.mask, config.mask_grid);
  m.trajectory = encoders::trajectory_vector(entry.trajectory, entry.clip->width(),
                                             entry.clip->height(), config.trajectory_points);
  return m;
}

void sort_memory_inputs(std::vector<const MemoryInput*>& memories) {
  std::sort(memories.begin(), memories.end(), [](const MemoryInput* a, const MemoryInput* b) {
    if (a->score != b->score) return a->score > b->score;
    return a->entry_id < b->entry_id;
  });
}

Policy::Policy(PolicyConfig config) : config_(std::move(config)) {
  config_.validate();
  build();
}

Policy::~Policy() = default;
Policy::Policy(Policy&&) noexcept = default;
Policy& Policy::operator=(Policy&&) noexcept = default;

void Policy::build() {
  const std::size_t d = config_.d_model;
  const std::size_t dh = config_.d_hidden;
  std::uint64_t salt = 0;
  auto seed = [&] { return mix_seed(config_.seed, ++salt); };
  auto small = [&](std::size_t rows, std::size_t cols) {
    Tensor t = nn::seeded_init(rows, cols, nn::InitScheme::kUniformFanIn, seed());
    for (double& v : t.values()) v *= 0.1 * std::sqrt(static_cast<double>(rows));
    return t;
  };

  text_proj_ = nn::Linear::create(store_, "text_proj", config_.text_dim, d, seed());
  frame_proj_ = nn::Linear::create(store_, "frame_proj", d, d, seed());
  proprio_mlp_ = nn::Mlp::create(store_, "proprio", config_.dof, dh, d, seed());
  const auto mask_in = static_cast<std::size_t>(config_.mask_grid * config_.mask_grid);
  mask_mlp_ = nn::Mlp::create(store_, "mask_encoder", mask_in, dh, d, seed());
  traj_mlp_ = nn::Mlp::create(store_, "traj_encoder",
                              static_cast<std::size_t>(2 * config_.trajectory_points), dh, d, seed());
  state_token_ = store_.add("state_token", small(1, d));
  sep_token_ = store_.add("sep_token", small(1, d));
  robot_segments_ = store_.add("robot_segments", small(3, d));
  memory_segments_ = store_.add("memory_segments", small(6, d));
  fusion_ = Fusion::create(store_, "fusion", d, config_.heads, seed());
  for (std::size_t l = 0; l < config_.layers; ++l) {
    blocks_.push_back(nn::TransformerBlock::create(store_, "block" + std::to_string(l), d,
                                                   config_.heads, dh, seed()));
  }
  queries_ = store_.add("queries", small(config_.horizon, d));
  final_ln_ = nn::LayerNorm::create(store_, "final_ln", d);
  head_ = nn::Linear::create(store_, "head", d, config_.dof, seed());
}

nn::Tensor Policy::robot_tokens(const ObservationInput& obs, ForwardCache& cache) const {
  if (obs.frames.cols() != config_.d_model) throw Error(ErrorCode::kDimMismatch, "frame token width");
  if (obs.proprio.cols() != config_.dof) throw Error(ErrorCode::kDimMismatch, "proprio width");
  if (obs.text.rows() > 0 && obs.text.cols() != config_.text_dim) {
    throw Error(ErrorCode::kDimMismatch, "text embedding width");
  }
  std::vector<Tensor> parts;
  Tensor fr = obs.frames;
  const auto g2 = static_cast<std::size_t>(config_.grid * config_.grid);
  for (std::size_t r = 0; r < fr.rows(); r += g2) standardize_rows(fr, r, std::min(r + g2, fr.rows()));
  parts.push_back(nn::linear_forward(frame_proj_, fr, cache.frame));
  parts.push_back(nn::mlp_forward(proprio_mlp_, obs.proprio, cache.proprio));
  if (obs.text.rows() > 0) parts.push_back(nn::linear_forward(text_proj_, obs.text, cache.text));
  Tensor robot = nn::vstack(parts);
  cache.frame_rows = obs.frames.rows();
  cache.text_rows = obs.text.rows();
  cache.robot_rows = robot.rows();
  std::vector<int> positions(robot.rows());
  for (std::size_t i = 0; i < robot.rows(); ++i) {
    positions[i] = static_cast<int>(i);
    add_row(robot, i, robot_segments_->value.row(robot_segment_row(i, cache.frame_rows)));
  }
  encoders::add_position_embeddings(robot, positions);
  for (std::size_t i = 0; i < cache.frame_rows; ++i) {
    add_row(robot, i, encoders::grid_position_embedding(static_cast<int>(i % g2), config_.grid, config_.d_model).data());
  }
  return robot;
}

encoders::TokenSequence Policy::memory_tokens(const std::vector<const MemoryInput*>& memories,
                                              ForwardCache& cache) const {
  const std::size_t d = config_.d_model;
  std::vector<const MemoryInput*> ordered = memories;
  sort_memory_inputs(ordered);
  std::vector<encoders::MemoryFeature> features;
  cache.memories.assign(ordered.size(), MemoryCache{});
  for (std::size_t m = 0; m < ordered.size(); ++m) {
    const MemoryInput& in = *ordered[m];
    MemoryCache& mc = cache.memories[m];
    mc.text_rows = in.text.rows();
    mc.video_rows = in.video.length();
    const Tensor text = nn::linear_forward(text_proj_, in.text, mc.text);
    encoders::TokenSequence video = in.video;
    Tensor frames = in.video.vectors;
    standardize_rows(frames, 0, frames.rows());
    video.vectors = nn::linear_forward(frame_proj_, frames, mc.video);
    const Tensor mask =
        config_.zero_mask ? Tensor(1, d) : nn::mlp_forward(mask_mlp_, in.occupancy, mc.mask);
    const Tensor traj =
        config_.zero_trajectory ? Tensor(1, d) : nn::mlp_forward(traj_mlp_, in.trajectory, mc.traj);
    features.push_back(
        {in.entry_id, encoders::assemble_memory(text, state_token_->value, video, mask, traj), in.score});
  }
  encoders::TokenSequence seq = encoders::concat_memories(std::move(features), sep_token_->value);
  for (std::size_t i = 0; i < seq.length(); ++i) {
    add_row(seq.vectors, i, memory_segments_->value.row(memory_segment_row(seq.segments[i])));
  }
  encoders::add_position_embeddings(seq.vectors, seq.positions);
  cache.memory_segments = seq.segments;
  cache.memory_owners = seq.owners;
  cache.memory_rows = seq.length();
  return seq;
}

encoders::TokenSequence Policy::encode_observation(const ObservationInput& obs) const {
  ForwardCache cache;
  encoders::TokenSequence seq;
  seq.vectors = robot_tokens(obs, cache);
  for (std::size_t i = 0; i < seq.vectors.rows(); ++i) {
    const std::size_t row = robot_segment_row(i, cache.frame_rows);
    seq.segments.push_back(row == kRobotVideo     ? Segment::kVideo
                           : row == kRobotProprio ? Segment::kProprio
                                                  : Segment::kText);
    seq.positions.push_back(static_cast<int>(i));
    seq.sizes.push_back(1.0);
    seq.owners.push_back(-1);
  }
  return seq;
}

encoders::TokenSequence Policy::encode_memories(
    const std::vector<const MemoryInput*>& memories) const {
  ForwardCache cache;
  return memory_tokens(memories, cache);
}

ActionChunk Policy::forward(const ObservationInput& obs,
                            const std::vector<const MemoryInput*>& memories,
                            std::unique_ptr<ForwardCache>* cache_out) const {
  auto cache = std::make_unique<ForwardCache>();

  Tensor robot = robot_tokens(obs, *cache);
  Tensor memory;
  if (config_.use_retrieval && !memories.empty()) memory = memory_tokens(memories, *cache).vectors;

  // Fusion and trunk input.
  std::vector<Tensor> trunk_parts;
  if (cache->memory_rows > 0) {
    Tensor fused = fuse_forward(fusion_, robot, memory, config_.fusion_mode, cache->fusion);
    cache->fused_rows = fused.rows();
    if (config_.fusion_mode == FusionMode::kPaper) trunk_parts.push_back(robot);
    trunk_parts.push_back(std::move(fused));
  } else {
    trunk_parts.push_back(robot);
  }
  trunk_parts.push_back(queries_->value);
  Tensor x = nn::vstack(trunk_parts);
  cache->trunk_rows = x.rows();

  cache->blocks.resize(blocks_.size());
  for (std::size_t l = 0; l < blocks_.size(); ++l) x = nn::block_forward(blocks_[l], x, cache->blocks[l]);

  const std::size_t h = config_.horizon;
  const Tensor q = nn::slice_rows(x, x.rows() - h, x.rows());
  const Tensor qn = nn::layernorm_forward(final_ln_, q, cache->final_ln);
  ActionChunk chunk{nn::linear_forward(head_, qn, cache->head)};
  if (cache_out) *cache_out = std::move(cache);
  return chunk;
}

void Policy::backward(const ForwardCache& cache, const Tensor& d_actions) {
  const std::size_t d = config_.d_model;
  const std::size_t h = config_.horizon;
  require_shape(d_actions, h, config_.dof, "d_actions");

  const Tensor d_qn = nn::linear_backward(head_, cache.head, d_actions);
  const Tensor d_q = nn::layernorm_backward(final_ln_, cache.final_ln, d_qn);
  Tensor dx(cache.trunk_rows, d);
  for (std::size_t r = 0; r < h; ++r) {
    std::copy(d_q.row(r), d_q.row(r) + d, dx.row(cache.trunk_rows - h + r));
  }
  for (std::size_t l = blocks_.size(); l-- > 0;) dx = nn::block_backward(blocks_[l], cache.blocks[l], dx);

  nn::add_inplace(queries_->grad, nn::slice_rows(dx, cache.trunk_rows - h, cache.trunk_rows));

  Tensor d_robot;
  Tensor d_memory;
  if (cache.memory_rows > 0) {
    Tensor d_fused;
    if (config_.fusion_mode == FusionMode::kPaper) {
      d_robot = nn::slice_rows(dx, 0, cache.robot_rows);
      d_fused = nn::slice_rows(dx, cache.robot_rows, cache.robot_rows + cache.fused_rows);
    } else {
      d_fused = nn::slice_rows(dx, 0, cache.fused_rows);
      d_robot = Tensor(cache.robot_rows, d);
    }
    const FusionGrads fg = fuse_backward(fusion_, cache.fusion, d_fused);
    nn::add_inplace(d_robot, fg.d_robot);
    d_memory = fg.d_memory;
  } else {
    d_robot = nn::slice_rows(dx, 0, cache.robot_rows);
  }

  // Robot token grads.
  const std::size_t nf = cache.frame_rows;
  Tensor d_frames = nn::slice_rows(d_robot, 0, nf);
  for (std::size_t r = 0; r < cache.robot_rows; ++r) {
    add_row(robot_segments_->grad, robot_segment_row(r, nf), d_robot.row(r));
  }
  nn::linear_backward(frame_proj_, cache.frame, d_frames);
  nn::mlp_backward(proprio_mlp_, cache.proprio, nn::slice_rows(d_robot, nf, nf + 1));
  if (cache.text_rows > 0) {
    nn::linear_backward(text_proj_, cache.text, nn::slice_rows(d_robot, nf + 1, cache.robot_rows));
  }

  if (cache.memory_rows == 0) return;

  // Memory token grads, routed by segment and owner.
  const std::size_t n_mem = cache.memories.size();
  std::vector<Tensor> d_text(n_mem), d_video(n_mem), d_mask(n_mem), d_traj(n_mem);
  std::vector<std::size_t> text_i(n_mem, 0), video_i(n_mem, 0);
  for (std::size_t m = 0; m < n_mem; ++m) {
    d_text[m] = Tensor(cache.memories[m].text_rows, d);
    d_video[m] = Tensor(cache.memories[m].video_rows, d);
    d_mask[m] = Tensor(1, d);
    d_traj[m] = Tensor(1, d);
  }
  for (std::size_t r = 0; r < cache.memory_rows; ++r) {
    const Segment seg = cache.memory_segments[r];
    const double* g = d_memory.row(r);
    add_row(memory_segments_->grad, memory_segment_row(seg), g);
    if (seg == Segment::kSep) {
      add_row(sep_token_->grad, 0, g);
      continue;
    }
    const auto m = static_cast<std::size_t>(cache.memory_owners[r]);
    switch (seg) {
      case Segment::kText: add_row(d_text[m], text_i[m]++, g); break;
      case Segment::kState: add_row(state_token_->grad, 0, g); break;
      case Segment::kVideo: add_row(d_video[m], video_i[m]++, g); break;
      case Segment::kMask: add_row(d_mask[m], 0, g); break;
      case Segment::kTraj: add_row(d_traj[m], 0, g); break;
      default: break;
    }
  }
  for (std::size_t m = 0; m < n_mem; ++m) {
    const MemoryCache& mc = cache.memories[m];
    nn::linear_backward(text_proj_, mc.text, d_text[m]);
    nn::linear_backward(frame_proj_, mc.video, d_video[m]);
    if (!config_.zero_mask) nn::mlp_backward(mask_mlp_, mc.mask, d_mask[m]);
    if (!config_.zero_trajectory) nn::mlp_backward(traj_mlp_, mc.traj, d_traj[m]);
  }
}

void Policy::save(const std::filesystem::path& dir) const {
  nn::save_parameters(store_, dir);
  std::ofstream out(dir / kPolicyConfigName);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + (dir / kPolicyConfigName).string());
  out << to_json(config_).dump(2) << "\n";
}

Policy Policy::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / kPolicyConfigName);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + (dir / kPolicyConfigName).string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("policy config: ") + e.what());
  }
  Policy p(policy_config_from_json(j));
  nn::load_parameters(p.store_, dir);
  return p;
}

double bc_loss(const ActionChunk& pred, const ActionChunk& expert) {
  if (!pred.actions.same_shape(expert.actions) || pred.actions.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "bc_loss " + pred.actions.shape_string() + " vs " +
                                               expert.actions.shape_string());
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pred.actions.size(); ++i) {
    s += std::abs(pred.actions.values()[i] - expert.actions.values()[i]);
  }
  return s / static_cast<double>(pred.actions.size());
}

Tensor bc_loss_grad(const ActionChunk& pred, const ActionChunk& expert) {
  if (!pred.actions.same_shape(expert.actions)) {
    throw Error(ErrorCode::kShapeMismatch, "bc_loss_grad shapes");
  }
  Tensor g(pred.actions.rows(), pred.actions.cols());
  const double scale = 1.0 / static_cast<double>(pred.actions.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double diff = pred.actions.values()[i] - expert.actions.values()[i];
    g.values()[i] = diff > 0 ? scale : (diff < 0 ? -scale : 0.0);
  }
  return g;
}

}  // namespace rfv::policy
