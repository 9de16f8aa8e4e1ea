#include "rfv/kernels/kernels.hpp"

namespace rfv::kernels::detail {
namespace {

void gemm_nn_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                    std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    }
    // i-k-j order: each c[i][j] still sees k = 0, 1, ... in sequence.
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] = crow[j] + av * brow[j];
    }
  }
}

void gemm_tn_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                    std::size_t n, bool accumulate) {
  if (!accumulate) {
    for (std::size_t i = 0; i < k * n; ++i) c[i] = 0.0;
  }
  for (std::size_t r = 0; r < m; ++r) {
    const double* arow = a + r * k;
    const double* brow = b + r * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      double* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] = crow[j] + av * brow[j];
    }
  }
}

void score_blocks_scalar(const double* blocks, std::size_t num_blocks, const double* q,
                         std::size_t dim, double* out) {
  for (std::size_t b = 0; b < num_blocks; ++b) {
    const double* block = blocks + b * dim * kBlockRows;
    double acc[kBlockRows] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t j = 0; j < dim; ++j) {
      for (std::size_t lane = 0; lane < kBlockRows; ++lane) {
        acc[lane] = acc[lane] + q[j] * block[j * kBlockRows + lane];
      }
    }
    for (std::size_t lane = 0; lane < kBlockRows; ++lane) out[b * kBlockRows + lane] = acc[lane];
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{gemm_nn_scalar, gemm_tn_scalar, score_blocks_scalar};
  return table;
}

}  // namespace rfv::kernels::detail
