#include "rfv/policy/fusion.hpp"

#include "rfv/core/error.hpp"
#include "rfv/core/rng.hpp"

namespace rfv::policy {

std::string_view fusion_mode_name(FusionMode mode) {
  return mode == FusionMode::kPaper ? "paper" : "standard";
}

FusionMode parse_fusion_mode(std::string_view name) {
  if (name == "paper") return FusionMode::kPaper;
  if (name == "standard") return FusionMode::kStandard;
  throw Error(ErrorCode::kConfigError, "unknown fusion_mode '" + std::string(name) + "'");
}

Fusion Fusion::create(nn::ParameterStore& store, const std::string& name, std::size_t d_model,
                      std::size_t heads, std::uint64_t seed) {
  Fusion f;
  f.ln_attend = nn::LayerNorm::create(store, name + ".ln_attend", d_model);
  f.ln_value = nn::LayerNorm::create(store, name + ".ln_value", d_model);
  f.attn = nn::MultiHeadAttention::create(store, name + ".attn", d_model, heads, seed);
  return f;
}

std::vector<std::size_t> paper_gather_index(std::size_t robot_rows, std::size_t memory_rows) {
  std::vector<std::size_t> idx(memory_rows);
  for (std::size_t j = 0; j < memory_rows; ++j) idx[j] = j * robot_rows / memory_rows;
  return idx;
}

nn::Tensor fuse_forward(const Fusion& fusion, const nn::Tensor& robot, const nn::Tensor& memory,
                        FusionMode mode, FusionCache& cache) {
  if (robot.rows() == 0 || memory.rows() == 0) {
    throw Error(ErrorCode::kShapeMismatch, "fusion needs non-empty robot and memory tokens");
  }
  if (robot.cols() != memory.cols()) {
    throw Error(ErrorCode::kShapeMismatch,
                "fusion widths " + robot.shape_string() + " vs " + memory.shape_string());
  }
  cache.mode = mode;
  cache.robot_rows = robot.rows();
  cache.memory_rows = memory.rows();

  if (mode == FusionMode::kPaper) {
    cache.gather = paper_gather_index(robot.rows(), memory.rows());
    nn::Tensor gathered(memory.rows(), robot.cols());
    for (std::size_t j = 0; j < memory.rows(); ++j) {
      std::copy(robot.row(cache.gather[j]), robot.row(cache.gather[j]) + robot.cols(), gathered.row(j));
    }
    const nn::Tensor a = nn::layernorm_forward(fusion.ln_attend, memory, cache.ln_attend);
    const nn::Tensor v = nn::layernorm_forward(fusion.ln_value, gathered, cache.ln_value);
    return nn::add(memory, nn::mha_forward(fusion.attn, a, a, v, cache.attn));
  }
  cache.gather.clear();
  const nn::Tensor a = nn::layernorm_forward(fusion.ln_attend, robot, cache.ln_attend);
  const nn::Tensor m = nn::layernorm_forward(fusion.ln_value, memory, cache.ln_value);
  return nn::add(robot, nn::mha_forward(fusion.attn, a, m, m, cache.attn));
}

FusionGrads fuse_backward(const Fusion& fusion, const FusionCache& cache, const nn::Tensor& dy) {
  FusionGrads g;
  const nn::MhaGrads ag = nn::mha_backward(fusion.attn, cache.attn, dy);
  if (cache.mode == FusionMode::kPaper) {
    nn::Tensor d_attend = ag.d_query_source;
    nn::add_inplace(d_attend, ag.d_key_source);
    g.d_memory = dy;
    nn::add_inplace(g.d_memory, nn::layernorm_backward(fusion.ln_attend, cache.ln_attend, d_attend));
    const nn::Tensor d_gathered = nn::layernorm_backward(fusion.ln_value, cache.ln_value, ag.d_value_source);
    g.d_robot = nn::Tensor(cache.robot_rows, dy.cols());
    for (std::size_t j = 0; j < cache.memory_rows; ++j) {
      double* dst = g.d_robot.row(cache.gather[j]);
      const double* src = d_gathered.row(j);
      for (std::size_t c = 0; c < dy.cols(); ++c) dst[c] += src[c];
    }
    return g;
  }
  g.d_robot = dy;
  nn::add_inplace(g.d_robot, nn::layernorm_backward(fusion.ln_attend, cache.ln_attend, ag.d_query_source));
  nn::Tensor d_mem = ag.d_key_source;
  nn::add_inplace(d_mem, ag.d_value_source);
  g.d_memory = nn::layernorm_backward(fusion.ln_value, cache.ln_value, d_mem);
  return g;
}

}  // namespace rfv::policy
