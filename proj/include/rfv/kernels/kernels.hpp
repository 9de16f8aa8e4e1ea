#pragma once

// Dense f64 kernels behind a runtime-selected ISA table.
//
// Every variant vectorises across independent outputs and accumulates each
// output element in the same order as the scalar reference (start at 0 or the
// existing value, then add products for k = 0, 1, ... using separate multiply
// and add). Results are therefore bit-identical across ISAs.

#include <cstddef>
#include <string_view>

namespace rfv::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa best_isa();
Isa active_isa();
// Selects the kernel table; throws rfv::Error(kInvalidArgument) if the host
// lacks the ISA. RFV_ISA=scalar|avx2|neon overrides the startup choice.
void set_isa(Isa isa);

// C[m x n] = (accumulate ? C : 0) + A[m x k] * B[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);
// C[k x n] = (accumulate ? C : 0) + A[m x k]^T * B[m x n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);
// C[m x n] = (accumulate ? C : 0) + A[m x k] * B[n x k]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);

inline constexpr std::size_t kBlockRows = 4;

// Inner products of q with `num_blocks` groups of 4 rows stored interleaved
// as block[b][j][lane]. out[4*b + lane] = sum_j q[j] * row_{4b+lane}[j].
void score_blocks(const double* blocks, std::size_t num_blocks, const double* q, std::size_t dim,
                  double* out);

// Plain sequential dot product (same accumulation order as score_blocks lanes).
double dot(const double* a, const double* b, std::size_t n);

namespace detail {

struct KernelTable {
  void (*gemm_nn)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t,
                  bool);
  void (*gemm_tn)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t,
                  bool);
  void (*score_blocks)(const double*, std::size_t, const double*, std::size_t, double*);
};

const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();  // nullptr when not compiled in

}  // namespace detail
}  // namespace rfv::kernels
