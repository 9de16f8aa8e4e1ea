#include <cmath>
#include <functional>

#include "doctest.h"
#include "rfv/core/error.hpp"
#include "rfv/nncore/ops.hpp"
#include "rfv/nncore/params.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"

using namespace rfv;
using namespace rfv::nn;
using testing::probe;
using testing::random_tensor;

namespace {

constexpr double kTol = 1e-4;

}  // namespace

TEST_CASE("identity linear layer is a no-op") {
  ParameterStore store;
  Linear l = Linear::create(store, "l", 3, 3, 1);
  l.weight->value = Tensor(3, 3);
  for (int i = 0; i < 3; ++i) l.weight->value(i, i) = 1.0;
  l.bias->value.fill(0.0);
  Rng rng(1);
  const Tensor x = random_tensor(rng, 4, 3);
  LinearCache cache;
  CHECK(linear_forward(l, x, cache) == x);
  CHECK_THROWS_AS(linear_forward(l, Tensor(2, 5), cache), Error);
}

TEST_CASE("softmax rows are distributions") {
  const Tensor uniform(2, 5, 3.0);
  const Tensor s = softmax_forward(uniform);
  for (double v : s.values()) CHECK(v == doctest::Approx(0.2).epsilon(1e-15));
  Rng rng(2);
  const Tensor r = softmax_forward(random_tensor(rng, 6, 9, 30.0));
  for (std::size_t i = 0; i < 6; ++i) {
    double sum = 0;
    for (std::size_t j = 0; j < 9; ++j) {
      CHECK(r(i, j) >= 0.0);
      sum += r(i, j);
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("gradient checks over 20 random instances per op") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed + 100);
    const std::size_t n = 2 + rng.below(3), d = 4, h = 6;
    testing::GradCheckResult worst;

    // linear
    {
      ParameterStore store;
      Linear l = Linear::create(store, "l", d, h, seed);
      Tensor x = random_tensor(rng, n, d);
      const Tensor w = random_tensor(rng, n, h);
      LinearCache c;
      linear_forward(l, x, c);
      const Tensor dx = linear_backward(l, c, w);
      auto loss = [&] {
        LinearCache cc;
        return probe(linear_forward(l, x, cc), w);
      };
      testing::merge_result(worst, testing::check_param_grads(store, loss));
      testing::merge_result(worst, testing::check_tensor_grad(x, dx, loss, "linear.x"));
    }
    // layer norm
    {
      ParameterStore store;
      LayerNorm ln = LayerNorm::create(store, "ln", d);
      for (double& v : ln.gamma->value.values()) v = 1.0 + 0.3 * rng.normal();
      for (double& v : ln.beta->value.values()) v = 0.3 * rng.normal();
      Tensor x = random_tensor(rng, n, d);
      const Tensor w = random_tensor(rng, n, d);
      LayerNormCache c;
      layernorm_forward(ln, x, c);
      const Tensor dx = layernorm_backward(ln, c, w);
      auto loss = [&] {
        LayerNormCache cc;
        return probe(layernorm_forward(ln, x, cc), w);
      };
      testing::merge_result(worst, testing::check_param_grads(store, loss));
      testing::merge_result(worst, testing::check_tensor_grad(x, dx, loss, "ln.x"));
    }
    // softmax and gelu
    {
      Tensor x = random_tensor(rng, n, d);
      const Tensor w = random_tensor(rng, n, d);
      const Tensor dx = softmax_backward(softmax_forward(x), w);
      auto loss = [&] { return probe(softmax_forward(x), w); };
      testing::merge_result(worst, testing::check_tensor_grad(x, dx, loss, "softmax.x"));
      const Tensor dg = gelu_backward(x, w);
      auto gloss = [&] { return probe(gelu_forward(x), w); };
      testing::merge_result(worst, testing::check_tensor_grad(x, dg, gloss, "gelu.x"));
    }
    // mlp
    {
      ParameterStore store;
      Mlp mlp = Mlp::create(store, "mlp", d, h, 3, seed);
      Tensor x = random_tensor(rng, n, d);
      const Tensor w = random_tensor(rng, n, 3);
      MlpCache c;
      mlp_forward(mlp, x, c);
      const Tensor dx = mlp_backward(mlp, c, w);
      auto loss = [&] {
        MlpCache cc;
        return probe(mlp_forward(mlp, x, cc), w);
      };
      testing::merge_result(worst, testing::check_param_grads(store, loss));
      testing::merge_result(worst, testing::check_tensor_grad(x, dx, loss, "mlp.x"));
    }
    // multi-head attention with three distinct sources
    {
      ParameterStore store;
      MultiHeadAttention mha = MultiHeadAttention::create(store, "mha", d, 2, seed);
      const std::size_t lk = 1 + rng.below(4);
      Tensor q = random_tensor(rng, n, d), k = random_tensor(rng, lk, d), v = random_tensor(rng, lk, d);
      const Tensor w = random_tensor(rng, n, d);
      MhaCache c;
      mha_forward(mha, q, k, v, c);
      const MhaGrads g = mha_backward(mha, c, w);
      auto loss = [&] {
        MhaCache cc;
        return probe(mha_forward(mha, q, k, v, cc), w);
      };
      testing::merge_result(worst, testing::check_param_grads(store, loss));
      testing::merge_result(worst, testing::check_tensor_grad(q, g.d_query_source, loss, "mha.q"));
      testing::merge_result(worst, testing::check_tensor_grad(k, g.d_key_source, loss, "mha.k"));
      testing::merge_result(worst, testing::check_tensor_grad(v, g.d_value_source, loss, "mha.v"));
    }
    // transformer block
    {
      ParameterStore store;
      TransformerBlock blk = TransformerBlock::create(store, "blk", d, 2, h, seed);
      Tensor x = random_tensor(rng, n, d);
      const Tensor w = random_tensor(rng, n, d);
      TransformerBlockCache c;
      block_forward(blk, x, c);
      const Tensor dx = block_backward(blk, c, w);
      auto loss = [&] {
        TransformerBlockCache cc;
        return probe(block_forward(blk, x, cc), w);
      };
      testing::merge_result(worst, testing::check_param_grads(store, loss));
      testing::merge_result(worst, testing::check_tensor_grad(x, dx, loss, "block.x"));
    }
    INFO("seed " << seed << " worst " << worst.worst);
    CHECK(worst.max_rel_error < kTol);
  }
}

TEST_CASE("attention probabilities sum to one") {
  ParameterStore store;
  MultiHeadAttention mha = MultiHeadAttention::create(store, "mha", 8, 4, 3);
  Rng rng(3);
  MhaCache c;
  mha_forward(mha, random_tensor(rng, 3, 8), random_tensor(rng, 5, 8), random_tensor(rng, 5, 8), c);
  REQUIRE(c.probs.size() == 4);
  for (const Tensor& p : c.probs) {
    for (std::size_t i = 0; i < p.rows(); ++i) {
      double s = 0;
      for (std::size_t j = 0; j < p.cols(); ++j) s += p(i, j);
      CHECK(std::abs(s - 1.0) < 1e-6);
    }
  }
  CHECK_THROWS_AS(MultiHeadAttention::create(store, "bad", 6, 4, 1), Error);
}

TEST_CASE("adam behaviour") {
  ParameterStore store;
  Param* w = store.add("w", Tensor(1, 1, 1.0));
  store.zero_grads();
  store.adam_step({0.1});
  CHECK(w->value(0, 0) == 1.0);

  w->grad(0, 0) = 2.0 * w->value(0, 0);
  store.adam_step({0.1});
  CHECK(w->value(0, 0) < 1.0);
}

TEST_CASE("adam matches an independently scripted trace on a quadratic") {
  // f(w) = 0.5 * sum a_i (w_i - c_i)^2
  const std::vector<double> a{1.0, 3.0, 0.5}, c{0.3, -0.7, 1.2};
  ParameterStore store;
  Param* w = store.add("w", Tensor(1, 3, 0.0));
  std::vector<double> ref(3, 0.0), m(3, 0.0), v(3, 0.0);
  const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  for (int t = 1; t <= 100; ++t) {
    store.zero_grads();
    for (int i = 0; i < 3; ++i) w->grad(0, i) = a[i] * (w->value(0, i) - c[i]);
    store.adam_step({lr, b1, b2, eps});
    for (int i = 0; i < 3; ++i) {
      const double g = a[i] * (ref[i] - c[i]);
      m[i] = b1 * m[i] + (1 - b1) * g;
      v[i] = b2 * v[i] + (1 - b2) * g * g;
      const double mh = m[i] / (1 - std::pow(b1, t)), vh = v[i] / (1 - std::pow(b2, t));
      ref[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
  double loss = 0;
  for (int i = 0; i < 3; ++i) {
    CHECK(w->value(0, i) == doctest::Approx(ref[i]).epsilon(1e-12));
    loss += 0.5 * a[i] * (w->value(0, i) - c[i]) * (w->value(0, i) - c[i]);
  }
  CHECK(loss < 1e-3);
}

TEST_CASE("seeded init determinism and variance") {
  CHECK(seeded_init(4, 5, InitScheme::kUniformFanIn, 7) == seeded_init(4, 5, InitScheme::kUniformFanIn, 7));
  CHECK_FALSE(seeded_init(4, 5, InitScheme::kUniformFanIn, 7) ==
              seeded_init(4, 5, InitScheme::kUniformFanIn, 8));
  const Tensor zeros = seeded_init(3, 3, InitScheme::kZeros, 1);
  for (double v : zeros.values()) CHECK(v == 0.0);

  const Tensor big = seeded_init(100, 10000, InitScheme::kUniformFanIn, 9);
  double mean = 0, sq = 0;
  for (double v : big.values()) mean += v;
  mean /= static_cast<double>(big.size());
  for (double v : big.values()) sq += (v - mean) * (v - mean);
  const double var = sq / static_cast<double>(big.size());
  const double expected = (1.0 / 100.0) / 3.0;  // U(-b, b) with b = 1/sqrt(100)
  CHECK(std::abs(var - expected) / expected < 0.05);
}

TEST_CASE("checkpoint save/load is bit-exact") {
  ParameterStore a;
  Mlp::create(a, "m", 3, 5, 2, 11);
  a.at("m.fc1.weight").value(0, 0) = 1.0 / 3.0;
  ParameterStore b;
  Mlp::create(b, "m", 3, 5, 2, 99);
  CHECK_FALSE(parameters_bit_equal(a, b));
  const auto dir = testing::scratch_dir("ckpt");
  save_parameters(a, dir);
  load_parameters(b, dir);
  CHECK(parameters_bit_equal(a, b));

  ParameterStore c;
  Mlp::create(c, "other", 3, 5, 2, 1);
  CHECK_THROWS_AS(load_parameters(c, dir), Error);
}

TEST_CASE("decoupled weight decay shrinks weights when gradients vanish") {
  ParameterStore store;
  Linear l = Linear::create(store, "l", 3, 2, 5);
  const Tensor before = l.weight->value;
  store.zero_grads();
  AdamConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.5;
  store.adam_step(cfg);
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(l.weight->value.values()[i] == doctest::Approx(before.values()[i] * (1.0 - 0.05)).epsilon(1e-12));
  }
}
