#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "rfv/bank/types.hpp"
#include "rfv/encoders/tokens.hpp"
#include "rfv/nncore/ops.hpp"
#include "rfv/policy/config.hpp"
#include "rfv/policy/fusion.hpp"

namespace rfv::policy {

struct RobotObservation {
  std::vector<bank::Frame> views;  // one frame per configured view, same order
  std::vector<double> proprio;     // dof values
  std::string instruction;
};

struct ActionChunk {
  nn::Tensor actions;  // horizon x dof
  std::size_t horizon() const { return actions.rows(); }
  std::size_t dof() const { return actions.cols(); }
};

// Parameter-free model inputs; everything here is deterministic given the
// observation or bank entry and can be cached.
struct ObservationInput {
  nn::Tensor frames;   // (views * grid^2) x d_model, fixed featurizer projection
  nn::Tensor proprio;  // 1 x dof
  nn::Tensor text;     // words x text_dim, hashed word embeddings
};

struct MemoryInput {
  std::string entry_id;
  double score = 0.0;
  nn::Tensor text;                 // words x text_dim
  encoders::TokenSequence video;   // ToMe-reduced featurizer tokens, d_model wide
  nn::Tensor occupancy;            // 1 x mask_grid^2
  nn::Tensor trajectory;           // 1 x 2 * trajectory_points
};

// One row per word of `text` (lowercased alphanumeric runs).
nn::Tensor word_embeddings(const std::string& text, std::size_t dim);

ObservationInput prepare_observation(const RobotObservation& obs, const PolicyConfig& config);
MemoryInput prepare_memory(const bank::BankEntry& entry, double score, const PolicyConfig& config);

// Canonical memory order: descending score, then ascending entry_id.
void sort_memory_inputs(std::vector<const MemoryInput*>& memories);

// Activations kept by Policy::forward for Policy::backward.
struct MemoryCache {
  nn::LinearCache text;
  nn::LinearCache video;
  nn::MlpCache mask;
  nn::MlpCache traj;
  std::size_t text_rows = 0;
  std::size_t video_rows = 0;
};

struct ForwardCache {
  nn::LinearCache frame;
  nn::LinearCache text;
  nn::MlpCache proprio;
  std::size_t frame_rows = 0;
  std::size_t text_rows = 0;
  std::size_t robot_rows = 0;

  std::vector<MemoryCache> memories;
  std::vector<encoders::Segment> memory_segments;
  std::vector<int> memory_owners;
  std::size_t memory_rows = 0;
  std::size_t fused_rows = 0;
  FusionCache fusion;

  std::vector<nn::TransformerBlockCache> blocks;
  std::size_t trunk_rows = 0;
  nn::LayerNormCache final_ln;
  nn::LinearCache head;
};


class Policy {
 public:
  explicit Policy(PolicyConfig config);
  ~Policy();
  Policy(Policy&&) noexcept;
  Policy& operator=(Policy&&) noexcept;

  const PolicyConfig& config() const { return config_; }
  nn::ParameterStore& params() { return store_; }
  const nn::ParameterStore& params() const { return store_; }

  // Robot token sequence: [VIDEO (views * grid^2)][PROPRIO][TEXT (words)].
  encoders::TokenSequence encode_observation(const ObservationInput& obs) const;

  // Memory token sequence for the given memories (canonical order applied),
  // [TEXT][STATE][VIDEO][MASK][TRAJ] per entry with SEP between entries.
  encoders::TokenSequence encode_memories(const std::vector<const MemoryInput*>& memories) const;

  // Deterministic action chunk. Memories are ignored when use_retrieval is
  // off. When `cache` is given it receives what backward() needs.
  ActionChunk forward(const ObservationInput& obs, const std::vector<const MemoryInput*>& memories,
                      std::unique_ptr<ForwardCache>* cache = nullptr) const;

  // Accumulates parameter gradients for d(loss)/d(actions).
  void backward(const ForwardCache& cache, const nn::Tensor& d_actions);

  // Checkpoint directory: nncore parameter files plus policy_config.json.
  void save(const std::filesystem::path& dir) const;
  static Policy load(const std::filesystem::path& dir);

  // Direct access for tests and probes.
  const nn::Linear& head() const { return head_; }
  const Fusion& fusion() const { return fusion_; }
  const nn::Mlp& mask_encoder() const { return mask_mlp_; }
  const nn::Mlp& trajectory_encoder() const { return traj_mlp_; }

 private:
  void build();
  nn::Tensor robot_tokens(const ObservationInput& obs, ForwardCache& cache) const;
  encoders::TokenSequence memory_tokens(const std::vector<const MemoryInput*>& memories,
                                        ForwardCache& cache) const;

  PolicyConfig config_;
  nn::ParameterStore store_;
  nn::Linear text_proj_;
  nn::Linear frame_proj_;
  nn::Mlp proprio_mlp_;
  nn::Mlp mask_mlp_;
  nn::Mlp traj_mlp_;
  nn::Param* state_token_ = nullptr;
  nn::Param* sep_token_ = nullptr;
  nn::Param* robot_segments_ = nullptr;   // VIDEO, PROPRIO, TEXT
  nn::Param* memory_segments_ = nullptr;  // TEXT, STATE, VIDEO, MASK, TRAJ, SEP
  Fusion fusion_;
  std::vector<nn::TransformerBlock> blocks_;
  nn::Param* queries_ = nullptr;
  nn::LayerNorm final_ln_;
  nn::Linear head_;
};

inline constexpr const char* kPolicyConfigName = "policy_config.json";

// Mean absolute error over horizon x dof. Throws kShapeMismatch.
double bc_loss(const ActionChunk& pred, const ActionChunk& expert);
// d(bc_loss)/d(pred): sign(pred - expert) / (horizon * dof), 0 at ties.
nn::Tensor bc_loss_grad(const ActionChunk& pred, const ActionChunk& expert);

}  // namespace rfv::policy
