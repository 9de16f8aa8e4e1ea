#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "rfv/policy/fusion.hpp"

namespace rfv::policy {

enum class EnsembleMode { kTemporal, kFirstAction };

struct PolicyConfig {
  std::size_t d_model = 64;
  std::size_t d_hidden = 128;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t horizon = 8;
  std::size_t dof = 4;
  std::size_t k_retrieved = 3;
  double keep_fraction = 0.1;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  FusionMode fusion_mode = FusionMode::kPaper;

  bool use_retrieval = true;
  bool zero_trajectory = false;
  bool zero_mask = false;

  std::vector<std::string> views{"top"};
  int grid = 4;
  std::uint64_t featurizer_seed = 1234;
  std::size_t text_dim = 64;
  int mask_grid = 16;
  int trajectory_points = 16;

  EnsembleMode ensemble = EnsembleMode::kTemporal;
  double ensemble_m = 0.1;

  // Throws kConfigError on violated invariants.
  void validate() const;
  bool operator==(const PolicyConfig&) const = default;
};

nlohmann::json to_json(const PolicyConfig& config);
// Missing keys keep their defaults; unknown keys raise kConfigError.
PolicyConfig policy_config_from_json(const nlohmann::json& j);

}  // namespace rfv::policy
