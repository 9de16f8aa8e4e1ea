#include <vector>

#include "doctest.h"
#include "rfv/core/rng.hpp"
#include "rfv/kernels/kernels.hpp"

using namespace rfv;
namespace k = rfv::kernels;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

std::vector<const k::detail::KernelTable*> simd_tables() {
  std::vector<const k::detail::KernelTable*> out;
  if (k::detail::avx2_table() && k::isa_supported(k::Isa::kAvx2)) out.push_back(k::detail::avx2_table());
  if (k::detail::neon_table() && k::isa_supported(k::Isa::kNeon)) out.push_back(k::detail::neon_table());
  return out;
}

}  // namespace

TEST_CASE("scalar gemm matches a naive triple loop") {
  Rng rng(1);
  const std::size_t m = 5, kk = 7, n = 3;
  const auto a = random_vec(rng, m * kk);
  const auto b = random_vec(rng, kk * n);
  std::vector<double> c(m * n);
  k::detail::scalar_table().gemm_nn(a.data(), b.data(), c.data(), m, kk, n, false);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t p = 0; p < kk; ++p) s += a[i * kk + p] * b[p * n + j];
      CHECK(c[i * n + j] == doctest::Approx(s).epsilon(1e-12));
    }
  }
}

TEST_CASE("gemm_tn and gemm_nt agree with explicit transposes") {
  Rng rng(2);
  const std::size_t m = 6, kk = 4, n = 5;
  const auto a = random_vec(rng, m * kk);
  const auto b = random_vec(rng, m * n);
  std::vector<double> at(kk * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < kk; ++p) at[p * m + i] = a[i * kk + p];
  std::vector<double> c1(kk * n), c2(kk * n);
  k::gemm_tn(a.data(), b.data(), c1.data(), m, kk, n, false);
  k::gemm_nn(at.data(), b.data(), c2.data(), kk, m, n, false);
  CHECK(c1 == c2);

  const auto bt = random_vec(rng, n * kk);  // n x k
  std::vector<double> btt(kk * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t p = 0; p < kk; ++p) btt[p * n + j] = bt[j * kk + p];
  std::vector<double> d1(m * n), d2(m * n);
  k::gemm_nt(a.data(), bt.data(), d1.data(), m, kk, n, false);
  k::gemm_nn(a.data(), btt.data(), d2.data(), m, kk, n, false);
  CHECK(d1 == d2);
}

TEST_CASE("accumulate adds into the existing output") {
  const std::vector<double> a{1, 2}, b{3, 4};  // 1x2 * 2x1
  std::vector<double> c{10};
  k::gemm_nn(a.data(), b.data(), c.data(), 1, 2, 1, true);
  CHECK(c[0] == 21);
}

TEST_CASE("SIMD gemm variants are bit-identical to scalar") {
  const auto tables = simd_tables();
  if (tables.empty()) MESSAGE("no SIMD ISA on this host; only scalar exercised");
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng.below(9), kk = 1 + rng.below(40), n = 1 + rng.below(37);
    const bool acc = rng.bernoulli(0.5);
    const auto a = random_vec(rng, m * kk);
    const auto b = random_vec(rng, kk * n);
    const auto b2 = random_vec(rng, m * n);
    const auto init = random_vec(rng, std::max(m, kk) * n);
    for (const auto* t : tables) {
      std::vector<double> ref(init.begin(), init.begin() + static_cast<long>(m * n)), got = ref;
      k::detail::scalar_table().gemm_nn(a.data(), b.data(), ref.data(), m, kk, n, acc);
      t->gemm_nn(a.data(), b.data(), got.data(), m, kk, n, acc);
      REQUIRE(ref == got);

      std::vector<double> ref2(init.begin(), init.begin() + static_cast<long>(kk * n)), got2 = ref2;
      k::detail::scalar_table().gemm_tn(a.data(), b2.data(), ref2.data(), m, kk, n, acc);
      t->gemm_tn(a.data(), b2.data(), got2.data(), m, kk, n, acc);
      REQUIRE(ref2 == got2);
    }
  }
}

TEST_CASE("SIMD block scoring is bit-identical to scalar and to dot") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t blocks = 1 + rng.below(6), dim = 1 + rng.below(70);
    const auto data = random_vec(rng, blocks * k::kBlockRows * dim);
    const auto q = random_vec(rng, dim);
    std::vector<double> ref(blocks * k::kBlockRows);
    k::detail::scalar_table().score_blocks(data.data(), blocks, q.data(), dim, ref.data());
    for (std::size_t b = 0; b < blocks; ++b) {
      for (std::size_t lane = 0; lane < k::kBlockRows; ++lane) {
        std::vector<double> row(dim);
        for (std::size_t j = 0; j < dim; ++j) row[j] = data[(b * dim + j) * k::kBlockRows + lane];
        REQUIRE(ref[b * k::kBlockRows + lane] == k::dot(q.data(), row.data(), dim));
      }
    }
    for (const auto* t : simd_tables()) {
      std::vector<double> got(ref.size());
      t->score_blocks(data.data(), blocks, q.data(), dim, got.data());
      REQUIRE(ref == got);
    }
  }
}

TEST_CASE("isa selection") {
  CHECK(k::isa_supported(k::Isa::kScalar));
  const k::Isa before = k::active_isa();
  k::set_isa(k::Isa::kScalar);
  CHECK(k::active_isa() == k::Isa::kScalar);
  k::set_isa(before);
  CHECK(k::isa_name(k::Isa::kAvx2) == "avx2");
}
