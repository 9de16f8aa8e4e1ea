#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rfv/nncore/ops.hpp"

namespace rfv::policy {

enum class FusionMode { kPaper, kStandard };

std::string_view fusion_mode_name(FusionMode mode);
FusionMode parse_fusion_mode(std::string_view name);  // kConfigError on unknown names

// Cross-attention between robot tokens and retrieved memory tokens.
//
// kPaper: queries and keys come from memory tokens and values from robot
// tokens. Value rows are gathered onto memory slots (slot j reads robot row
// floor(j * Lr / Lm)); output = memory + attention, length Lm.
// kStandard: queries from robot tokens, keys and values from memory;
// output = robot + attention, length Lr.
struct Fusion {
  nn::LayerNorm ln_attend;  // normalises the query/key side
  nn::LayerNorm ln_value;   // normalises the value side
  nn::MultiHeadAttention attn;

  static Fusion create(nn::ParameterStore& store, const std::string& name, std::size_t d_model,
                       std::size_t heads, std::uint64_t seed);
};

struct FusionCache {
  FusionMode mode = FusionMode::kPaper;
  std::size_t robot_rows = 0;
  std::size_t memory_rows = 0;
  std::vector<std::size_t> gather;  // paper mode: robot row per memory slot
  nn::LayerNormCache ln_attend;
  nn::LayerNormCache ln_value;
  nn::MhaCache attn;
};

struct FusionGrads {
  nn::Tensor d_robot;
  nn::Tensor d_memory;
};

std::vector<std::size_t> paper_gather_index(std::size_t robot_rows, std::size_t memory_rows);

// Throws kShapeMismatch when either side is empty or widths differ.
nn::Tensor fuse_forward(const Fusion& fusion, const nn::Tensor& robot, const nn::Tensor& memory,
                        FusionMode mode, FusionCache& cache);
FusionGrads fuse_backward(const Fusion& fusion, const FusionCache& cache, const nn::Tensor& dy);

}  // namespace rfv::policy
