#pragma once

#include <memory>
#include <vector>

#include "rfv/encoders/tome.hpp"
#include "rfv/policy/policy.hpp"
#include "support/gradcheck.hpp"

namespace rfv::testing {

inline policy::PolicyConfig tiny_policy_config(policy::FusionMode mode = policy::FusionMode::kPaper) {
  policy::PolicyConfig c;
  c.d_model = 16;
  c.d_hidden = 16;
  c.heads = 2;
  c.layers = 1;
  c.horizon = 3;
  c.dof = 4;
  c.k_retrieved = 2;
  c.grid = 2;
  c.text_dim = 8;
  c.mask_grid = 4;
  c.trajectory_points = 4;
  c.fusion_mode = mode;
  return c;
}

inline policy::ObservationInput random_observation(Rng& rng, const policy::PolicyConfig& c,
                                                   std::size_t words = 3) {
  policy::ObservationInput o;
  o.frames = random_tensor(rng, c.views.size() * static_cast<std::size_t>(c.grid * c.grid), c.d_model);
  o.proprio = random_tensor(rng, 1, c.dof);
  o.text = random_tensor(rng, words, c.text_dim);
  return o;
}

inline policy::MemoryInput random_memory(Rng& rng, const policy::PolicyConfig& c,
                                         const std::string& id, double score) {
  policy::MemoryInput m;
  m.entry_id = id;
  m.score = score;
  m.text = random_tensor(rng, 2, c.text_dim);
  std::vector<encoders::TokenSet> frames;
  for (int f = 0; f < 2; ++f) {
    frames.push_back(encoders::make_token_set(random_tensor(rng, 4, c.d_model)));
  }
  m.video = encoders::reduce_tokens(frames, 0.5);
  m.occupancy = random_tensor(rng, 1, static_cast<std::size_t>(c.mask_grid * c.mask_grid));
  m.trajectory = random_tensor(rng, 1, static_cast<std::size_t>(2 * c.trajectory_points));
  return m;
}

}  // namespace rfv::testing
