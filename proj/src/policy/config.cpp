#include "rfv/policy/config.hpp"

#include <set>

#include "rfv/core/error.hpp"

namespace rfv::policy {

void PolicyConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfigError, what); };
  if (d_model == 0 || d_hidden == 0 || horizon == 0 || dof == 0) fail("dimensions must be positive");
  if (heads == 0 || d_model % heads != 0) fail("heads must divide d_model");
  if (k_retrieved < 1) fail("k_retrieved must be >= 1");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) fail("keep_fraction must lie in (0, 1]");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be >= 0");
  if (views.empty()) fail("at least one view is required");
  if (grid < 1 || mask_grid < 1 || trajectory_points < 2) fail("grid sizes");
  if (text_dim == 0) fail("text_dim must be positive");
  if (ensemble_m < 0.0) fail("ensemble_m must be >= 0");
}

nlohmann::json to_json(const PolicyConfig& c) {
  return {
      {"d_model", c.d_model},
      {"d_hidden", c.d_hidden},
      {"heads", c.heads},
      {"layers", c.layers},
      {"horizon", c.horizon},
      {"dof", c.dof},
      {"k_retrieved", c.k_retrieved},
      {"keep_fraction", c.keep_fraction},
      {"learning_rate", c.learning_rate},
      {"weight_decay", c.weight_decay},
      {"seed", c.seed},
      {"fusion_mode", std::string(fusion_mode_name(c.fusion_mode))},
      {"use_retrieval", c.use_retrieval},
      {"zero_trajectory", c.zero_trajectory},
      {"zero_mask", c.zero_mask},
      {"views", c.views},
      {"grid", c.grid},
      {"featurizer_seed", c.featurizer_seed},
      {"text_dim", c.text_dim},
      {"mask_grid", c.mask_grid},
      {"trajectory_points", c.trajectory_points},
      {"ensemble", c.ensemble == EnsembleMode::kTemporal ? "temporal" : "first"},
      {"ensemble_m", c.ensemble_m},
  };
}

PolicyConfig policy_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigError, "policy config must be an object");
  const nlohmann::json defaults = to_json(PolicyConfig{});
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) throw Error(ErrorCode::kConfigError, "unknown policy key '" + key + "'");
  }
  PolicyConfig c;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("d_model", c.d_model);
    get("d_hidden", c.d_hidden);
    get("heads", c.heads);
    get("layers", c.layers);
    get("horizon", c.horizon);
    get("dof", c.dof);
    get("k_retrieved", c.k_retrieved);
    get("keep_fraction", c.keep_fraction);
    get("learning_rate", c.learning_rate);
    get("weight_decay", c.weight_decay);
    get("seed", c.seed);
    if (j.contains("fusion_mode")) c.fusion_mode = parse_fusion_mode(j.at("fusion_mode").get<std::string>());
    get("use_retrieval", c.use_retrieval);
    get("zero_trajectory", c.zero_trajectory);
    get("zero_mask", c.zero_mask);
    get("views", c.views);
    get("grid", c.grid);
    get("featurizer_seed", c.featurizer_seed);
    get("text_dim", c.text_dim);
    get("mask_grid", c.mask_grid);
    get("trajectory_points", c.trajectory_points);
    if (j.contains("ensemble")) {
      const auto e = j.at("ensemble").get<std::string>();
      if (e == "temporal") c.ensemble = EnsembleMode::kTemporal;
      else if (e == "first") c.ensemble = EnsembleMode::kFirstAction;
      else throw Error(ErrorCode::kConfigError, "unknown ensemble mode '" + e + "'");
    }
    get("ensemble_m", c.ensemble_m);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("policy config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace rfv::policy
