#include <cmath>
#include <functional>

#include "doctest.h"
#include "rfv/core/error.hpp"
#include "rfv/policy/fusion.hpp"
#include "rfv/policy/policy.hpp"
#include "rfv/policy/training.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"
#include "support/policy_fixtures.hpp"

using namespace rfv;
using namespace rfv::policy;
using testing::probe;
using testing::random_tensor;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected rfv::Error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("memory-query fusion with a single memory token attends with weight 1") {
  nn::ParameterStore store;
  const Fusion f = Fusion::create(store, "f", 8, 2, 1);
  Rng rng(1);
  FusionCache cache;
  const auto out = fuse_forward(f, random_tensor(rng, 5, 8), random_tensor(rng, 1, 8), FusionMode::kPaper, cache);
  CHECK(out.rows() == 1);
  for (const auto& p : cache.attn.probs) CHECK(p(0, 0) == 1.0);
}

TEST_CASE("zero value projection gives a zero fused contribution") {
  nn::ParameterStore store;
  const Fusion f = Fusion::create(store, "f", 8, 2, 1);
  f.attn.v.weight->value.fill(0.0);
  Rng rng(2);
  const auto robot = random_tensor(rng, 4, 8), memory = random_tensor(rng, 6, 8);
  for (FusionMode mode : {FusionMode::kPaper, FusionMode::kStandard}) {
    FusionCache cache;
    const auto out = fuse_forward(f, robot, memory, mode, cache);
    const auto& residual = mode == FusionMode::kPaper ? memory : robot;
    CHECK(out.rows() == residual.rows());
    CHECK(out == residual);
  }
  FusionCache cache;
  CHECK(code_of([&] { fuse_forward(f, nn::Tensor(0, 8), memory, FusionMode::kPaper, cache); }) ==
        ErrorCode::kShapeMismatch);
}

TEST_CASE("gather index spreads robot rows over memory slots") {
  CHECK(paper_gather_index(4, 8) == std::vector<std::size_t>{0, 0, 1, 1, 2, 2, 3, 3});
  CHECK(paper_gather_index(10, 3) == std::vector<std::size_t>{0, 3, 6});
}

TEST_CASE("fusion gradients match finite differences in both modes") {
  for (FusionMode mode : {FusionMode::kPaper, FusionMode::kStandard}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      nn::ParameterStore store;
      const Fusion f = Fusion::create(store, "f", 8, 2, seed);
      Rng rng(seed + 10);
      auto robot = random_tensor(rng, 3 + seed % 3, 8), memory = random_tensor(rng, 4 + seed % 4, 8);
      FusionCache cache;
      const auto y = fuse_forward(f, robot, memory, mode, cache);
      const auto w = random_tensor(rng, y.rows(), y.cols());
      const FusionGrads g = fuse_backward(f, cache, w);
      auto loss = [&] {
        FusionCache c;
        return probe(fuse_forward(f, robot, memory, mode, c), w);
      };
      testing::GradCheckResult r = testing::check_param_grads(store, loss);
      testing::merge_result(r, testing::check_tensor_grad(robot, g.d_robot, loss, "robot"));
      testing::merge_result(r, testing::check_tensor_grad(memory, g.d_memory, loss, "memory"));
      INFO(fusion_mode_name(mode) << " " << r.worst);
      CHECK(r.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("end-to-end policy gradients match finite differences") {
  for (FusionMode mode : {FusionMode::kPaper, FusionMode::kStandard}) {
    for (bool retrieval : {true, false}) {
      PolicyConfig cfg = testing::tiny_policy_config(mode);
      cfg.use_retrieval = retrieval;
      Policy policy(cfg);
      Rng rng(33);
      // Non-trivial norms so layer norm gradients are exercised.
      for (const auto& [name, p] : policy.params().params()) {
        if (name.find("gamma") != std::string::npos || name.find("bias") != std::string::npos ||
            name.find("beta") != std::string::npos) {
          for (double& v : p->value.values()) v += 0.2 * rng.normal();
        }
      }
      const auto obs = testing::random_observation(rng, cfg);
      const auto m1 = testing::random_memory(rng, cfg, "a", 0.9);
      const auto m2 = testing::random_memory(rng, cfg, "b", 0.4);
      const std::vector<const MemoryInput*> mems{&m2, &m1};
      std::unique_ptr<ForwardCache> cache;
      const auto y = policy.forward(obs, mems, &cache);
      const auto w = random_tensor(rng, y.actions.rows(), y.actions.cols());
      policy.params().zero_grads();
      policy.backward(*cache, w);
      auto loss = [&] { return probe(policy.forward(obs, mems).actions, w); };
      const auto r = testing::check_param_grads(policy.params(), loss);
      INFO(fusion_mode_name(mode) << " retrieval=" << retrieval << " " << r.worst);
      CHECK(r.checked == policy.params().num_scalars());
      CHECK(r.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("forward shapes, zero head and observation tokens") {
  const PolicyConfig cfg = testing::tiny_policy_config();
  Policy policy(cfg);
  Rng rng(4);
  const auto obs = testing::random_observation(rng, cfg, 5);
  const auto seq = policy.encode_observation(obs);
  CHECK(seq.length() == 4 + 1 + 5);
  CHECK(seq.segments[4] == encoders::Segment::kProprio);
  const auto chunk = policy.forward(obs, {});
  CHECK(chunk.horizon() == 3);
  CHECK(chunk.dof() == 4);

  policy.head().weight->value.fill(0.0);
  policy.head().bias->value.fill(0.0);
  const auto zero_chunk = policy.forward(obs, {});
  for (double v : zero_chunk.actions.values()) CHECK(v == 0.0);
}

TEST_CASE("equal-score memories are canonically ordered") {
  const PolicyConfig cfg = testing::tiny_policy_config();
  Policy policy(cfg);
  Rng rng(5);
  const auto obs = testing::random_observation(rng, cfg);
  const auto a = testing::random_memory(rng, cfg, "a", 0.5);
  const auto b = testing::random_memory(rng, cfg, "b", 0.5);
  const auto x = policy.forward(obs, {&a, &b});
  const auto y = policy.forward(obs, {&b, &a});
  CHECK(x.actions == y.actions);
  const auto mem_seq = policy.encode_memories({&b, &a});
  CHECK(mem_seq.owners.front() == 0);
  CHECK(mem_seq == policy.encode_memories({&a, &b}));
}

TEST_CASE("trajectory and mask zeroing removes those channels") {
  PolicyConfig cfg = testing::tiny_policy_config();
  Rng rng(6);
  const auto obs = testing::random_observation(rng, cfg);
  auto m = testing::random_memory(rng, cfg, "a", 1.0);
  auto changed = m;
  for (double& v : changed.trajectory.values()) v += 1.0;
  for (double& v : changed.occupancy.values()) v += 1.0;

  cfg.zero_trajectory = cfg.zero_mask = true;
  Policy zeroed(cfg);
  CHECK(zeroed.forward(obs, {&m}).actions == zeroed.forward(obs, {&changed}).actions);
  cfg.zero_trajectory = cfg.zero_mask = false;
  Policy full(cfg);
  CHECK_FALSE(full.forward(obs, {&m}).actions == full.forward(obs, {&changed}).actions);
}

TEST_CASE("bc loss examples") {
  Rng rng(7);
  const ActionChunk e{random_tensor(rng, 4, 3)};
  CHECK(bc_loss(e, e) == 0.0);
  ActionChunk p = e;
  for (double& v : p.actions.values()) v += 1.0;
  CHECK(bc_loss(p, e) == doctest::Approx(1.0).epsilon(1e-12));
  const ActionChunk r{random_tensor(rng, 4, 3)};
  double s = 0;
  for (std::size_t i = 0; i < 12; ++i) s += std::abs(r.actions.values()[i] - e.actions.values()[i]);
  CHECK(bc_loss(r, e) == doctest::Approx(s / 12).epsilon(1e-12));
  CHECK(code_of([&] { bc_loss(ActionChunk{nn::Tensor(2, 3)}, e); }) == ErrorCode::kShapeMismatch);
}

TEST_CASE("training overfits one sample and is deterministic") {
  const PolicyConfig cfg = testing::tiny_policy_config();
  Rng rng(8);
  TrainingSample s;
  s.obs = testing::random_observation(rng, cfg);
  auto mems = std::make_shared<std::vector<MemoryInput>>();
  mems->push_back(testing::random_memory(rng, cfg, "a", 1.0));
  s.memories = mems;
  s.target.actions = nn::Tensor(cfg.horizon, cfg.dof);
  for (double& v : s.target.actions.values()) v = rng.uniform();
  const std::vector<TrainingSample> data{s};

  Policy p1(cfg), p2(cfg);
  TrainOptions opts;
  opts.steps = 200;
  opts.batch_size = 1;
  const auto r1 = train(p1, data, opts);
  const auto r2 = train(p2, data, opts);
  REQUIRE(r1.loss_trace.size() == 200);
  CHECK(r1.loss_trace.back() < 0.1 * r1.loss_trace.front());
  CHECK(r1.loss_trace == r2.loss_trace);
  CHECK(nn::parameters_bit_equal(p1.params(), p2.params()));
  Policy p3(cfg);
  CHECK(code_of([&] { train(p3, {}, opts); }) == ErrorCode::kEmptyDataset);
}

TEST_CASE("ensembler weights and degenerate cases") {
  for (std::size_t n : {1u, 3u, 8u}) {
    const auto w = ActionEnsembler::weights(n, 0.1);
    double s = 0;
    for (double v : w) s += v;
    CHECK(std::abs(s - 1.0) < 1e-9);
    for (std::size_t i = 1; i < n; ++i) CHECK(w[i] < w[i - 1]);
  }
  ActionEnsembler single(EnsembleMode::kTemporal, 0.1);
  single.add(0, ActionChunk{nn::Tensor(1, 2, 0.7)});
  CHECK(single.action(0) == std::vector<double>{0.7, 0.7});

  ActionEnsembler constant(EnsembleMode::kTemporal, 0.1);
  for (std::size_t t = 0; t < 5; ++t) {
    constant.add(t, ActionChunk{nn::Tensor(4, 2, 0.3)});
    for (double v : constant.action(t)) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));
  }

  ActionEnsembler mixed(EnsembleMode::kTemporal, 0.1);
  mixed.add(0, ActionChunk{nn::Tensor(2, 1, 1.0)});
  mixed.add(1, ActionChunk{nn::Tensor(2, 1, 0.0)});
  const auto w2 = ActionEnsembler::weights(2, 0.1);
  CHECK(mixed.action(1)[0] == doctest::Approx(w2[0]));

  ActionEnsembler first(EnsembleMode::kFirstAction, 0.1);
  first.add(0, ActionChunk{nn::Tensor(2, 1, 1.0)});
  first.add(1, ActionChunk{nn::Tensor(2, 1, 0.0)});
  CHECK(first.action(1)[0] == 0.0);
  CHECK(code_of([&] { (void)first.action(9); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("checkpoint round-trip keeps parameters and fusion mode") {
  PolicyConfig cfg = testing::tiny_policy_config(FusionMode::kStandard);
  cfg.seed = 17;
  Policy p(cfg);
  const auto dir = testing::scratch_dir("policy_ckpt");
  p.save(dir);
  const Policy q = Policy::load(dir);
  CHECK(q.config() == cfg);
  CHECK(q.config().fusion_mode == FusionMode::kStandard);
  CHECK(nn::parameters_bit_equal(p.params(), q.params()));
}

TEST_CASE("policy config json validation") {
  const PolicyConfig c = testing::tiny_policy_config();
  CHECK(policy_config_from_json(to_json(c)) == c);
  auto j = to_json(c);
  j["bogus"] = 1;
  CHECK(code_of([&] { policy_config_from_json(j); }) == ErrorCode::kConfigError);
  j = to_json(c);
  j["k_retrieved"] = 0;
  CHECK(code_of([&] { policy_config_from_json(j); }) == ErrorCode::kConfigError);
  j = to_json(c);
  j["fusion_mode"] = "sideways";
  CHECK(code_of([&] { policy_config_from_json(j); }) == ErrorCode::kConfigError);
}

TEST_CASE("cosine schedule reaches the final learning-rate fraction") {
  const PolicyConfig cfg = testing::tiny_policy_config();
  Rng rng(12);
  TrainingSample s;
  s.obs = testing::random_observation(rng, cfg);
  s.target.actions = nn::Tensor(cfg.horizon, cfg.dof, 0.5);
  const std::vector<TrainingSample> data{s};

  Policy p(cfg);
  std::vector<std::vector<double>> snapshots;
  TrainOptions opts;
  opts.steps = 6;
  opts.batch_size = 1;
  opts.final_lr_fraction = 0.0;
  opts.on_step = [&](std::size_t, double) {
    std::vector<double> flat;
    for (const auto& [name, param] : p.params().params()) {
      flat.insert(flat.end(), param->value.values().begin(), param->value.values().end());
    }
    snapshots.push_back(flat);
  };
  train(p, data, opts);
  REQUIRE(snapshots.size() == 6);
  CHECK(snapshots[5] == snapshots[4]);
  CHECK(snapshots[4] != snapshots[3]);

  for (double bad : {-0.1, 1.5}) {
    TrainOptions o;
    o.final_lr_fraction = bad;
    Policy q(cfg);
    CHECK(code_of([&] { train(q, data, o); }) == ErrorCode::kInvalidArgument);
  }
}
