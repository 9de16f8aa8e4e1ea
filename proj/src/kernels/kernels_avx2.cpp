// Compiled with -mavx2 (no FMA) when the toolchain targets x86-64.
#include "rfv/kernels/kernels.hpp"

#if defined(RFV_HAVE_AVX2)
#include <immintrin.h>

namespace rfv::kernels::detail {
namespace {

void gemm_nn_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
      __m256d c0 = accumulate ? _mm256_loadu_pd(crow + j) : _mm256_setzero_pd();
      __m256d c1 = accumulate ? _mm256_loadu_pd(crow + j + 4) : _mm256_setzero_pd();
      __m256d c2 = accumulate ? _mm256_loadu_pd(crow + j + 8) : _mm256_setzero_pd();
      __m256d c3 = accumulate ? _mm256_loadu_pd(crow + j + 12) : _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_broadcast_sd(arow + p);
        const double* brow = b + p * n + j;
        c0 = _mm256_add_pd(c0, _mm256_mul_pd(av, _mm256_loadu_pd(brow)));
        c1 = _mm256_add_pd(c1, _mm256_mul_pd(av, _mm256_loadu_pd(brow + 4)));
        c2 = _mm256_add_pd(c2, _mm256_mul_pd(av, _mm256_loadu_pd(brow + 8)));
        c3 = _mm256_add_pd(c3, _mm256_mul_pd(av, _mm256_loadu_pd(brow + 12)));
      }
      _mm256_storeu_pd(crow + j, c0);
      _mm256_storeu_pd(crow + j + 4, c1);
      _mm256_storeu_pd(crow + j + 8, c2);
      _mm256_storeu_pd(crow + j + 12, c3);
    }
    for (; j + 4 <= n; j += 4) {
      __m256d c0 = accumulate ? _mm256_loadu_pd(crow + j) : _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_broadcast_sd(arow + p);
        c0 = _mm256_add_pd(c0, _mm256_mul_pd(av, _mm256_loadu_pd(b + p * n + j)));
      }
      _mm256_storeu_pd(crow + j, c0);
    }
    for (; j < n; ++j) {
      double acc = accumulate ? crow[j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) acc = acc + arow[p] * b[p * n + j];
      crow[j] = acc;
    }
  }
}

void gemm_tn_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n, bool accumulate) {
  for (std::size_t p = 0; p < k; ++p) {
    double* crow = c + p * n;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d c0 = accumulate ? _mm256_loadu_pd(crow + j) : _mm256_setzero_pd();
      __m256d c1 = accumulate ? _mm256_loadu_pd(crow + j + 4) : _mm256_setzero_pd();
      for (std::size_t r = 0; r < m; ++r) {
        const __m256d av = _mm256_broadcast_sd(a + r * k + p);
        const double* brow = b + r * n + j;
        c0 = _mm256_add_pd(c0, _mm256_mul_pd(av, _mm256_loadu_pd(brow)));
        c1 = _mm256_add_pd(c1, _mm256_mul_pd(av, _mm256_loadu_pd(brow + 4)));
      }
      _mm256_storeu_pd(crow + j, c0);
      _mm256_storeu_pd(crow + j + 4, c1);
    }
    for (; j + 4 <= n; j += 4) {
      __m256d c0 = accumulate ? _mm256_loadu_pd(crow + j) : _mm256_setzero_pd();
      for (std::size_t r = 0; r < m; ++r) {
        const __m256d av = _mm256_broadcast_sd(a + r * k + p);
        c0 = _mm256_add_pd(c0, _mm256_mul_pd(av, _mm256_loadu_pd(b + r * n + j)));
      }
      _mm256_storeu_pd(crow + j, c0);
    }
    for (; j < n; ++j) {
      double acc = accumulate ? crow[j] : 0.0;
      for (std::size_t r = 0; r < m; ++r) acc = acc + a[r * k + p] * b[r * n + j];
      crow[j] = acc;
    }
  }
}

void score_blocks_avx2(const double* blocks, std::size_t num_blocks, const double* q,
                       std::size_t dim, double* out) {
  std::size_t b = 0;
  for (; b + 2 <= num_blocks; b += 2) {
    const double* b0 = blocks + b * dim * kBlockRows;
    const double* b1 = b0 + dim * kBlockRows;
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    for (std::size_t j = 0; j < dim; ++j) {
      const __m256d qv = _mm256_broadcast_sd(q + j);
      acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(qv, _mm256_loadu_pd(b0 + j * kBlockRows)));
      acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(qv, _mm256_loadu_pd(b1 + j * kBlockRows)));
    }
    _mm256_storeu_pd(out + b * kBlockRows, acc0);
    _mm256_storeu_pd(out + (b + 1) * kBlockRows, acc1);
  }
  for (; b < num_blocks; ++b) {
    const double* b0 = blocks + b * dim * kBlockRows;
    __m256d acc0 = _mm256_setzero_pd();
    for (std::size_t j = 0; j < dim; ++j) {
      acc0 = _mm256_add_pd(acc0,
                           _mm256_mul_pd(_mm256_broadcast_sd(q + j), _mm256_loadu_pd(b0 + j * kBlockRows)));
    }
    _mm256_storeu_pd(out + b * kBlockRows, acc0);
  }
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{gemm_nn_avx2, gemm_tn_avx2, score_blocks_avx2};
  return &table;
}

}  // namespace rfv::kernels::detail

#else

namespace rfv::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace rfv::kernels::detail

#endif
