#include "rfv/kernels/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace rfv::kernels::detail {
namespace {

void gemm_nn_neon(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      float64x2_t c0 = accumulate ? vld1q_f64(crow + j) : vdupq_n_f64(0.0);
      float64x2_t c1 = accumulate ? vld1q_f64(crow + j + 2) : vdupq_n_f64(0.0);
      for (std::size_t p = 0; p < k; ++p) {
        const float64x2_t av = vdupq_n_f64(arow[p]);
        // vmul + vadd rather than vfma to match the scalar rounding sequence.
        c0 = vaddq_f64(c0, vmulq_f64(av, vld1q_f64(b + p * n + j)));
        c1 = vaddq_f64(c1, vmulq_f64(av, vld1q_f64(b + p * n + j + 2)));
      }
      vst1q_f64(crow + j, c0);
      vst1q_f64(crow + j + 2, c1);
    }
    for (; j < n; ++j) {
      double acc = accumulate ? crow[j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) acc = acc + arow[p] * b[p * n + j];
      crow[j] = acc;
    }
  }
}

void gemm_tn_neon(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n, bool accumulate) {
  for (std::size_t p = 0; p < k; ++p) {
    double* crow = c + p * n;
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
      float64x2_t c0 = accumulate ? vld1q_f64(crow + j) : vdupq_n_f64(0.0);
      for (std::size_t r = 0; r < m; ++r) {
        c0 = vaddq_f64(c0, vmulq_f64(vdupq_n_f64(a[r * k + p]), vld1q_f64(b + r * n + j)));
      }
      vst1q_f64(crow + j, c0);
    }
    for (; j < n; ++j) {
      double acc = accumulate ? crow[j] : 0.0;
      for (std::size_t r = 0; r < m; ++r) acc = acc + a[r * k + p] * b[r * n + j];
      crow[j] = acc;
    }
  }
}

void score_blocks_neon(const double* blocks, std::size_t num_blocks, const double* q,
                       std::size_t dim, double* out) {
  for (std::size_t b = 0; b < num_blocks; ++b) {
    const double* blk = blocks + b * dim * kBlockRows;
    float64x2_t lo = vdupq_n_f64(0.0);
    float64x2_t hi = vdupq_n_f64(0.0);
    for (std::size_t j = 0; j < dim; ++j) {
      const float64x2_t qv = vdupq_n_f64(q[j]);
      lo = vaddq_f64(lo, vmulq_f64(qv, vld1q_f64(blk + j * kBlockRows)));
      hi = vaddq_f64(hi, vmulq_f64(qv, vld1q_f64(blk + j * kBlockRows + 2)));
    }
    vst1q_f64(out + b * kBlockRows, lo);
    vst1q_f64(out + b * kBlockRows + 2, hi);
  }
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable table{gemm_nn_neon, gemm_tn_neon, score_blocks_neon};
  return &table;
}

}  // namespace rfv::kernels::detail

#else

namespace rfv::kernels::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace rfv::kernels::detail

#endif
