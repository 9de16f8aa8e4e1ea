#include <algorithm>
#include <functional>

#include "doctest.h"
#include "rfv/core/error.hpp"
#include "rfv/retriever/embedder.hpp"
#include "rfv/retriever/index.hpp"
#include "support/fixtures.hpp"

using namespace rfv;
using namespace rfv::retriever;

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

RetrievalIndex random_index(Rng& rng, std::size_t n, std::size_t dim, bool with_ties) {
  std::vector<std::string> ids, views;
  std::vector<double> rows;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "id%05zu", (i * 7919) % n);
    ids.emplace_back(buf);
    views.emplace_back(i % 3 == 0 ? "" : (i % 3 == 1 ? "left" : "right"));
    for (std::size_t j = 0; j < dim; ++j) {
      rows.push_back(with_ties ? static_cast<double>(rng.below(3)) : rng.normal() * (1 + i % 5));
    }
  }
  return RetrievalIndex(dim, ids, views, rows);
}

RankedList brute_force(const RetrievalIndex& idx, const EmbeddingVector& q, std::size_t k) {
  std::vector<RankedItem> all;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < idx.dim(); ++j) s += idx.row(i)[j] * q.values[j];
    all.push_back({idx.ids()[i], s});
  }
  std::sort(all.begin(), all.end(), [](const RankedItem& a, const RankedItem& b) {
    return a.score != b.score ? a.score > b.score : a.entry_id < b.entry_id;
  });
  all.resize(std::min(k, all.size()));
  return {all};
}

}  // namespace

TEST_CASE("tokenizer and embedder") {
  CHECK(tokenize("Pick up, the RED cup!") ==
        std::vector<std::string>{"pick", "up", "the", "red", "cup"});
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  const auto e = embed_text("open the drawer");
  CHECK(e.dim() == 64);
  CHECK(relevance(e, e) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(embed_text("Open THE drawer") == e);
  CHECK(code_of([] { embed_text(" ,;. "); }) == ErrorCode::kEmptyText);
  CHECK(code_of([&] { relevance(e, EmbeddingVector{{1.0, 2.0}}); }) == ErrorCode::kDimMismatch);
}

TEST_CASE("relevance is the exact dot product") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    EmbeddingVector a, b;
    const std::size_t d = 1 + rng.below(100);
    for (std::size_t j = 0; j < d; ++j) {
      a.values.push_back(rng.normal());
      b.values.push_back(rng.normal());
    }
    double s = 0;
    for (std::size_t j = 0; j < d; ++j) s += a.values[j] * b.values[j];
    REQUIRE(testing::max_rel_error(relevance(a, b), s) < 1e-12);
  }
}

TEST_CASE("pruned MIPS matches brute force, including ties") {
  Rng rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    const bool ties = trial % 3 == 0;
    const std::size_t n = 1 + rng.below(300), dim = 1 + rng.below(20);
    const auto idx = random_index(rng, n, dim, ties);
    EmbeddingVector q;
    for (std::size_t j = 0; j < dim; ++j) q.values.push_back(ties ? 1.0 : rng.normal());
    const std::size_t k = 1 + rng.below(12);
    SearchStats pruned_stats;
    const auto got = mips_topk(idx, q, k, {}, &pruned_stats);
    REQUIRE(got == brute_force(idx, q, k));
    SearchOptions no_prune;
    no_prune.prune = false;
    REQUIRE(mips_topk(idx, q, k, no_prune) == got);
    CHECK(pruned_stats.rows_scored <= ((n + 3) / 4) * 4);
  }
}

TEST_CASE("MIPS errors and small banks") {
  Rng rng(1);
  const auto idx = random_index(rng, 2, 4, false);
  EmbeddingVector q{{1, 0, 0, 0}};
  CHECK(mips_topk(idx, q, 10).items.size() == 2);
  CHECK(code_of([&] { mips_topk(idx, q, 0); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { mips_topk(idx, EmbeddingVector{{1.0}}, 1); }) == ErrorCode::kDimMismatch);
  const RetrievalIndex empty(4, {}, {}, {});
  CHECK(code_of([&] { mips_topk(empty, q, 1); }) == ErrorCode::kEmptyIndex);
}

TEST_CASE("bank index retrieves matching narration first, per view") {
  bank::Bank b;
  b.add_entry(testing::make_entry("a", "pick up the red cup", 1, "top"));
  b.add_entry(testing::make_entry("b", "open the drawer", 2, "side"));
  b.add_entry(testing::make_entry("c", "wipe the table", 3, ""));
  const auto idx = build_index(b);
  CHECK(idx.size() == 3);
  const auto top = mips_topk(idx, embed_text("open the drawer"), 3);
  CHECK(top.items.front().entry_id == "b");

  const auto per_view = retrieve_per_view(idx, "open the drawer", {"top", "side"}, 3);
  REQUIRE(per_view.size() == 2);
  for (const auto& item : per_view.at("top").items) CHECK(item.entry_id != "b");
  CHECK(per_view.at("side").items.front().entry_id == "b");
  CHECK(per_view.at("side").items.size() == 2);
  CHECK(view_matches("", "anything"));
  CHECK_FALSE(view_matches("top", "side"));
}

TEST_CASE("precomputed embeddings take precedence") {
  bank::Bank b;
  auto e = testing::make_entry("a", "alpha");
  e.embedding = std::vector<float>(64, 0.0f);
  (*e.embedding)[5] = 1.0f;
  b.add_entry(e);
  const auto idx = build_index(b);
  CHECK(idx.row(0)[5] == 1.0);

  bank::Bank b2;
  auto e2 = testing::make_entry("a", "alpha");
  e2.embedding = std::vector<float>(8, 1.0f);
  b2.add_entry(e2);
  CHECK(code_of([&] { build_index(b2); }) == ErrorCode::kDimMismatch);
}
