// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Long-running; run through ctest or directly.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "rfv/bank/bank.hpp"
#include "rfv/bank/rle.hpp"
#include "rfv/core/error.hpp"
#include "rfv/core/rng.hpp"
#include "rfv/encoders/tome.hpp"
#include "rfv/midlevel/midlevel.hpp"
#include "rfv/midlevel/spline.hpp"
#include "rfv/nncore/ops.hpp"
#include "rfv/policy/fusion.hpp"
#include "rfv/policy/policy.hpp"
#include "rfv/policy/training.hpp"
#include "rfv/retriever/embedder.hpp"
#include "rfv/retriever/index.hpp"
#include "rfv/service/retrieval_service.hpp"
#include "rfv/sim/experiments.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"
#include "support/policy_fixtures.hpp"

using namespace rfv;
using nlohmann::json;
using testing::probe;
using testing::random_tensor;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------- 1. MIPS

retriever::RankedList exhaustive(const retriever::RetrievalIndex& idx, const retriever::EmbeddingVector& q,
                                 std::size_t k) {
  std::vector<retriever::RankedItem> all;
  all.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < idx.dim(); ++j) s += idx.row(i)[j] * q.values[j];
    all.push_back({idx.ids()[i], s});
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.entry_id < b.entry_id;
  });
  all.resize(std::min(k, all.size()));
  return {all};
}

Outcome mips_exactness() {
  constexpr std::size_t kDim = 64;
  Rng rng(2024);
  double search_time = 0;
  int mismatches = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(10000);
    const bool ties = trial % 10 == 0;
    std::vector<std::string> ids;
    std::vector<std::string> views(n);
    std::vector<double> rows;
    rows.reserve(n * kDim);
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back("e" + std::to_string((i * 7919) % 100003));
      const double scale = 0.2 + 2.0 * rng.uniform();
      for (std::size_t j = 0; j < kDim; ++j) {
        rows.push_back(ties ? static_cast<double>(rng.below(2)) : rng.normal() * scale);
      }
    }
    const retriever::RetrievalIndex idx(kDim, ids, views, rows);
    retriever::EmbeddingVector q;
    for (std::size_t j = 0; j < kDim; ++j) q.values.push_back(ties ? 1.0 : rng.normal());
    const std::size_t k = 1 + rng.below(16);
    const auto start = Clock::now();
    const auto got = retriever::mips_topk(idx, q, k);
    search_time += seconds_since(start);
    if (got != exhaustive(idx, q, k)) ++mismatches;
  }
  return {mismatches == 0 && search_time < 5.0,
          std::to_string(mismatches) + " mismatches in 300 cases, search time " + fmt("%.3f", search_time) + " s"};
}

// ---------------------------------------------------------------- 2. relevance

std::string random_sentence(Rng& rng) {
  static const std::vector<std::string> words{"pick", "the",   "red",  "cube", "place", "on",   "lamp", "push",
                                              "blue", "box",   "into", "reach", "green", "mug",  "near", "shelf",
                                              "open", "drawer", "cup", "plate", "left",  "right", "slowly", "hand"};
  std::string s;
  const std::size_t n = 1 + rng.below(12);
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + words[rng.below(words.size())];
  return s;
}

Outcome relevance_fidelity() {
  Rng rng(7);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    retriever::EmbedderConfig cfg;
    cfg.dim = 16 + rng.below(120);
    retriever::EmbeddingVector a, b;
    if (i % 2 == 0) {
      a = retriever::embed_text(random_sentence(rng), cfg);
      b = retriever::embed_text(random_sentence(rng), cfg);
    } else {
      for (std::size_t j = 0; j < cfg.dim; ++j) {
        a.values.push_back(rng.normal());
        b.values.push_back(rng.normal());
      }
    }
    long double ref = 0;
    for (std::size_t j = a.values.size(); j-- > 0;) {
      ref += static_cast<long double>(a.values[j]) * static_cast<long double>(b.values[j]);
    }
    const double got = retriever::relevance(a, b);
    const double diff = std::abs(got - static_cast<double>(ref));
    worst = std::max(worst, diff == 0 ? 0.0 : diff / std::abs(static_cast<double>(ref)));
  }
  return {worst <= 1e-12, "worst relative error " + fmt("%.3g", worst) + " over 1000 pairs"};
}

// ---------------------------------------------------------------- 3. gradients

Outcome gradient_suite() {
  using namespace rfv::nn;
  testing::GradCheckResult worst;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 500);
    const std::size_t n = 2 + rng.below(3), d = 4, h = 6;
    {
      ParameterStore store;
      Linear l = Linear::create(store, "linear", d, h, seed);
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
    {
      ParameterStore store;
      LayerNorm ln = LayerNorm::create(store, "layernorm", d);
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
      testing::merge_result(worst, testing::check_tensor_grad(x, dx, loss, "layernorm.x"));
    }
    {
      Tensor x = random_tensor(rng, n, d);
      const Tensor w = random_tensor(rng, n, d);
      const Tensor ds = softmax_backward(softmax_forward(x), w);
      testing::merge_result(
          worst, testing::check_tensor_grad(x, ds, [&] { return probe(softmax_forward(x), w); }, "softmax.x"));
      const Tensor dg = gelu_backward(x, w);
      testing::merge_result(worst,
                            testing::check_tensor_grad(x, dg, [&] { return probe(gelu_forward(x), w); }, "gelu.x"));
    }
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
    {
      ParameterStore store;
      TransformerBlock blk = TransformerBlock::create(store, "block", d, 2, h, seed);
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
  }

  for (policy::FusionMode mode : {policy::FusionMode::kPaper, policy::FusionMode::kStandard}) {
    {
      nn::ParameterStore store;
      const policy::Fusion f = policy::Fusion::create(store, "fusion", 8, 2, 3);
      Rng rng(91);
      auto robot = random_tensor(rng, 4, 8), memory = random_tensor(rng, 6, 8);
      policy::FusionCache cache;
      const auto y = policy::fuse_forward(f, robot, memory, mode, cache);
      const auto w = random_tensor(rng, y.rows(), y.cols());
      const auto g = policy::fuse_backward(f, cache, w);
      auto loss = [&] {
        policy::FusionCache c;
        return probe(policy::fuse_forward(f, robot, memory, mode, c), w);
      };
      testing::merge_result(worst, testing::check_param_grads(store, loss));
      testing::merge_result(worst, testing::check_tensor_grad(robot, g.d_robot, loss, "fusion.robot"));
      testing::merge_result(worst, testing::check_tensor_grad(memory, g.d_memory, loss, "fusion.memory"));
    }
    for (bool retrieval : {true, false}) {
      policy::PolicyConfig cfg = testing::tiny_policy_config(mode);
      cfg.use_retrieval = retrieval;
      policy::Policy pol(cfg);
      Rng rng(33);
      for (const auto& [name, p] : pol.params().params()) {
        if (name.find("gamma") != std::string::npos || name.find("beta") != std::string::npos ||
            name.find("bias") != std::string::npos) {
          for (double& v : p->value.values()) v += 0.2 * rng.normal();
        }
      }
      const auto obs = testing::random_observation(rng, cfg);
      const auto m1 = testing::random_memory(rng, cfg, "a", 0.9);
      const auto m2 = testing::random_memory(rng, cfg, "b", 0.4);
      const std::vector<const policy::MemoryInput*> mems{&m2, &m1};
      std::unique_ptr<policy::ForwardCache> cache;
      const auto y = pol.forward(obs, mems, &cache);
      const auto w = random_tensor(rng, y.actions.rows(), y.actions.cols());
      pol.params().zero_grads();
      pol.backward(*cache, w);
      testing::merge_result(worst, testing::check_param_grads(pol.params(), [&] {
                              return probe(pol.forward(obs, mems).actions, w);
                            }));
    }
  }
  return {worst.max_rel_error < 1e-4, std::to_string(worst.checked) + " elements, worst relative error " +
                                          fmt("%.3g", worst.max_rel_error) +
                                          (worst.worst.empty() ? "" : " at " + worst.worst)};
}

// ---------------------------------------------------------------- 4. token merging

encoders::TokenSet random_set(Rng& rng, std::size_t n, std::size_t d) {
  nn::Tensor t(n, d);
  for (double& v : t.values()) v = rng.normal();
  return encoders::make_token_set(std::move(t));
}

Outcome tome_contract() {
  Rng rng(160);
  std::vector<std::string> problems;
  double worst_mean = 0;
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<encoders::TokenSet> frames;
    for (int f = 0; f < 10; ++f) frames.push_back(random_set(rng, 16, 12));
    const auto seq = encoders::reduce_tokens(frames, 0.1);
    if (seq.length() != 16) problems.push_back("count " + std::to_string(seq.length()));
    double total = 0;
    std::vector<double> out(12, 0.0), in(12, 0.0);
    for (std::size_t i = 0; i < seq.length(); ++i) {
      total += seq.sizes[i];
      for (std::size_t c = 0; c < 12; ++c) out[c] += seq.sizes[i] * seq.vectors(i, c) / 160;
    }
    for (const auto& f : frames)
      for (std::size_t i = 0; i < 16; ++i)
        for (std::size_t c = 0; c < 12; ++c) in[c] += f.vectors(i, c) / 160;
    if (total != 160.0) problems.push_back("size weight " + fmt("%g", total));
    for (std::size_t c = 0; c < 12; ++c) worst_mean = std::max(worst_mean, std::abs(out[c] - in[c]));
  }
  if (worst_mean > 1e-6) problems.push_back("mean drift " + fmt("%.3g", worst_mean));

  int selection_mismatch = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t na = 4 + rng.below(12), nb = 4 + rng.below(12), d = 3 + rng.below(8);
    const auto a = random_set(rng, na, d), b = random_set(rng, nb, d);
    struct Cand {
      std::size_t i, j;
      double s;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < na; ++i) {
      Cand best{i, 0, -2};
      for (std::size_t j = 0; j < nb; ++j) {
        double ab = 0, aa = 0, bb = 0;
        for (std::size_t c = 0; c < d; ++c) {
          ab += a.vectors(i, c) * b.vectors(j, c);
          aa += a.vectors(i, c) * a.vectors(i, c);
          bb += b.vectors(j, c) * b.vectors(j, c);
        }
        const double s = ab / std::sqrt(aa * bb);
        if (s > best.s) best = {i, j, s};
      }
      cands.push_back(best);
    }
    std::sort(cands.begin(), cands.end(),
              [](const Cand& x, const Cand& y) { return x.s != y.s ? x.s > y.s : x.i < y.i; });
    const std::size_t r = 1 + rng.below(std::min(na, nb));
    const auto sel = encoders::select_merges(a, b, r);
    bool ok = sel.size() == r;
    for (std::size_t p = 0; ok && p < r; ++p) ok = sel[p].a_index == cands[p].i && sel[p].b_index == cands[p].j;
    if (!ok) ++selection_mismatch;
  }
  if (selection_mismatch) problems.push_back(std::to_string(selection_mismatch) + "/50 selection mismatches");
  std::string detail = "160 -> 16 tokens, weight 160, mean drift " + fmt("%.3g", worst_mean) +
                       ", selection oracle 50/50";
  if (!problems.empty()) {
    detail.clear();
    for (const auto& p : problems) detail += (detail.empty() ? "" : "; ") + p;
  }
  return {problems.empty(), detail};
}

// ---------------------------------------------------------------- 5. splines

Outcome spline_smoothing() {
  Rng rng(55);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const double a = rng.normal(), b = rng.normal(), c = rng.normal(), d = rng.normal();
    std::vector<double> t, y;
    double tt = 0;
    const int n = 3 + static_cast<int>(rng.below(20));
    for (int i = 0; i < n; ++i) {
      tt += 0.2 + rng.uniform();
      t.push_back(tt);
      y.push_back(a + b * tt + c * tt * tt + d * tt * tt * tt);
    }
    const midlevel::SmoothingSpline s(t, y, 0.0);
    for (std::size_t i = 0; i < t.size(); ++i) worst = std::max(worst, std::abs(s(t[i]) - y[i]));
  }
  int reduced = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng r(seed + 1000);
    bank::HandTrajectory traj;
    const int n = 6 + static_cast<int>(r.below(40));
    for (int i = 0; i < n; ++i) traj.points.push_back({i, 10 + 0.5 * i + r.normal(), 20 - 0.3 * i + r.normal()});
    const auto smooth = midlevel::smooth_trajectory(traj, 10.0);
    if (midlevel::trajectory_roughness(smooth) < midlevel::trajectory_roughness(traj)) ++reduced;
  }
  return {worst <= 1e-9 && reduced == 100,
          "interpolation error " + fmt("%.3g", worst) + ", roughness reduced in " + std::to_string(reduced) + "/100"};
}

// ---------------------------------------------------------------- 6. round-trips

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome round_trips(const bank::Bank& human_bank) {
  Rng rng(6);
  int rle_fail = 0;
  for (int i = 0; i < 1000; ++i) {
    const int w = 1 + static_cast<int>(rng.below(64)), h = 1 + static_cast<int>(rng.below(64));
    const double p = rng.uniform();
    const auto bits = testing::random_bitmap(rng, static_cast<std::size_t>(w * h), p);
    const auto runs = bank::encode_rle(bits);
    if (bank::decode_rle(runs, w, h) != bits) ++rle_fail;
  }
  const auto bank_dir = testing::scratch_dir("acceptance_bank");
  bank::save_bank(human_bank, bank_dir);
  const bank::Bank loaded = bank::load_bank(bank_dir);
  const auto bank_dir2 = testing::scratch_dir("acceptance_bank2");
  bank::save_bank(loaded, bank_dir2);
  const bool bank_ok = bank::banks_equal(human_bank, loaded) &&
                       file_bytes(bank_dir / bank::kManifestName) == file_bytes(bank_dir2 / bank::kManifestName);

  policy::PolicyConfig cfg = sim::default_experiment().policy;
  cfg.seed = 99;
  const policy::Policy p(cfg);
  const auto ckpt = testing::scratch_dir("acceptance_ckpt");
  p.save(ckpt);
  const policy::Policy q = policy::Policy::load(ckpt);
  const bool ckpt_ok = q.config() == cfg && nn::parameters_bit_equal(p.params(), q.params());

  return {rle_fail == 0 && bank_ok && ckpt_ok,
          "rle " + std::to_string(1000 - rle_fail) + "/1000, bank (" + std::to_string(human_bank.size()) +
              " entries) " + (bank_ok ? "bit-exact" : "differs") + ", checkpoint " +
              (ckpt_ok ? "bit-exact" : "differs")};
}

// ---------------------------------------------------------------- 7. overfit

Outcome overfit(sim::Experiment& experiment) {
  sim::ExpertOptions expert;
  const auto demos = sim::collect_demos({sim::default_suite()[1]}, 1, 77, expert);
  policy::PolicyConfig cfg = experiment.policy_config(sim::full_variant(), 5);
  cfg.weight_decay = 0.0;
  cfg.learning_rate = 1e-2;
  const auto samples = sim::training_samples(demos, cfg, &experiment.memory());
  policy::TrainOptions opts;
  opts.steps = 200;
  opts.batch_size = samples.size();
  policy::Policy a(cfg), b(cfg);
  const auto ra = policy::train(a, samples, opts);
  const auto rb = policy::train(b, samples, opts);
  const double first = ra.loss_trace.front(), last = ra.loss_trace.back();
  const bool same = ra.loss_trace == rb.loss_trace && nn::parameters_bit_equal(a.params(), b.params());
  return {last < 0.1 * first && same, std::to_string(samples.size()) + " samples, loss " + fmt("%.4g", first) +
                                          " -> " + fmt("%.4g", last) + " (" + fmt("%.1f", 100 * last / first) +
                                          "%), traces " + (same ? "identical" : "differ")};
}

// ---------------------------------------------------------------- 8-10. experiments

Outcome end_to_end(sim::Experiment& experiment, double& elapsed) {
  const auto start = Clock::now();
  const sim::ResultTable table = sim::compare_variants(
      experiment, {sim::full_variant(), sim::no_retrieval_variant(), sim::no_trajectory_variant(),
                   sim::no_mask_variant()});
  elapsed = seconds_since(start);
  std::cout << table.to_text() << std::flush;
  const double full = table.at("RfV", "mean"), base = table.at("no retrieval", "mean");
  const double notraj = table.at("- hand motion trajectory", "mean"), nomask = table.at("- object affordance", "mean");
  std::cout << "  reported: full >= - hand motion trajectory: " << (full >= notraj ? "yes" : "no")
            << "; full >= - object affordance: " << (full >= nomask ? "yes" : "no")
            << "; - hand motion trajectory >= - object affordance: " << (notraj >= nomask ? "yes" : "no") << '\n';
  return {full - base >= 10.0 && elapsed < 1800.0,
          "RfV " + fmt("%.1f", full) + "% vs no retrieval " + fmt("%.1f", base) + "% (margin " +
              fmt("%+.1f", full - base) + " pp, need >= 10), runtime " + fmt("%.0f", elapsed) + " s"};
}

Outcome k_ablation(sim::Experiment& experiment) {
  const sim::ResultTable table = sim::ablation_k(experiment);
  std::cout << table.to_text() << std::flush;
  const double k1 = table.at("mean", "k=1"), k3 = table.at("mean", "k=3");
  return {table.columns.size() == 4 && k3 >= k1,
          std::to_string(table.columns.size()) + " columns, k=3 " + fmt("%.1f", k3) + "% vs k=1 " + fmt("%.1f", k1) +
              "%"};
}

Outcome probes(sim::Experiment& experiment) {
  const sim::ResultTable table = sim::generalization(experiment);
  std::cout << table.to_text() << std::flush;
  bool ok = table.rows.size() == 3;
  std::string detail = "margins:";
  for (const auto& row : table.rows) {
    const double margin = table.at(row, "margin");
    ok = ok && margin >= 0;
    detail += " " + row + " " + fmt("%+.1f", margin);
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 11. service

Outcome service_equivalence(std::shared_ptr<const bank::Bank> human_bank) {
  const service::RetrievalService svc(human_bank);
  httplib::Server server;
  svc.bind(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  if (port <= 0) return {false, "could not bind a port"};
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  std::vector<std::string> vocab;
  for (const auto& e : human_bank->entries()) {
    for (const auto& w : retriever::tokenize(e->narration.text)) vocab.push_back(w);
  }
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());

  httplib::Client client("127.0.0.1", port);
  Rng rng(11);
  int equal = 0;
  std::string first_diff;
  for (int i = 0; i < 100; ++i) {
    std::string query;
    const std::size_t words = 1 + rng.below(6);
    for (std::size_t w = 0; w < words; ++w) query += (w ? " " : "") + vocab[rng.below(vocab.size())];
    const std::size_t k = 1 + rng.below(10);
    json req{{"query", query}, {"k", k}};
    std::optional<std::string> view;
    if (i % 4 == 3) {
      view = "top";
      req["view"] = *view;
    }
    const auto res = client.Post("/v1/retrieve", req.dump(), "application/json");
    const std::string expected = service::ranked_list_json(svc.retrieve(query, k, view)).dump();
    std::string got;
    if (res && res->status == 200) {
      const json body = json::parse(res->body);
      if (body.is_object() && body.contains("results")) got = body["results"].dump();
    }
    if (got == expected) {
      ++equal;
    } else if (first_diff.empty()) {
      first_diff = " (first mismatch: '" + query + "')";
    }
  }

  const std::vector<std::pair<std::string, std::string>> malformed{
      {"bad json", "{\"query\": "},
      {"missing query", "{\"k\": 3}"},
      {"k=0", "{\"query\": \"pick up the cube\", \"k\": 0}"},
  };
  int rejected = 0;
  for (const auto& [name, body] : malformed) {
    const auto res = client.Post("/v1/retrieve", body, "application/json");
    if (res && res->status == 400) ++rejected;
  }
  server.stop();
  worker.join();
  return {equal == 100 && rejected == 3, std::to_string(equal) + "/100 byte-equal" + first_diff + ", " +
                                             std::to_string(rejected) + "/3 malformed requests got 400"};
}

}  // namespace

int main() {
  int failures = 0;
  auto run = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << name << ": " << o.detail << " ["
              << fmt("%.1f", seconds_since(start)) << " s]" << std::endl;
  };

  run(1, "MIPS exactness", mips_exactness);
  run(2, "relevance fidelity", relevance_fidelity);
  run(3, "gradient suite", gradient_suite);
  run(4, "token merging contract", tome_contract);
  run(5, "spline smoothing", spline_smoothing);

  std::unique_ptr<sim::Experiment> experiment;
  try {
    experiment = std::make_unique<sim::Experiment>(sim::default_experiment());
  } catch (const std::exception& e) {
    std::cout << "experiment setup failed: " << e.what() << std::endl;
  }
  auto needs_experiment = [&](const std::function<Outcome(sim::Experiment&)>& fn) {
    return [&, fn]() -> Outcome {
      if (!experiment) return {false, "experiment setup failed"};
      return fn(*experiment);
    };
  };

  run(6, "round-trips", needs_experiment([](sim::Experiment& e) { return round_trips(*e.bank()); }));
  run(7, "overfit sanity", needs_experiment(overfit));
  double elapsed = 0;
  run(8, "end-to-end retrieval benefit", needs_experiment([&](sim::Experiment& e) { return end_to_end(e, elapsed); }));
  run(9, "k ablation", needs_experiment(k_ablation));
  run(10, "generalization probes", needs_experiment(probes));
  run(11, "service equivalence", needs_experiment([](sim::Experiment& e) { return service_equivalence(e.bank()); }));

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
