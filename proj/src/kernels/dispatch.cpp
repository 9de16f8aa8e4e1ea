#include <atomic>
#include <cstdlib>
#include <string>
#include <vector>

#include "rfv/core/error.hpp"
#include "rfv/kernels/kernels.hpp"

namespace rfv::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const detail::KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return &detail::scalar_table();
    case Isa::kAvx2: return cpu_has_avx2() ? detail::avx2_table() : nullptr;
    case Isa::kNeon: return detail::neon_table();
  }
  return nullptr;
}

Isa startup_isa() {
  if (const char* env = std::getenv("RFV_ISA")) {
    const std::string want(env);
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
      if (want == isa_name(isa) && table_for(isa) != nullptr) return isa;
    }
  }
  return best_isa();
}

struct ActiveTable {
  std::atomic<Isa> isa{startup_isa()};
  std::atomic<const detail::KernelTable*> table{table_for(isa.load())};
};

ActiveTable& active() {
  static ActiveTable state;
  return state;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) { return table_for(isa) != nullptr; }

Isa best_isa() {
  if (isa_supported(Isa::kAvx2)) return Isa::kAvx2;
  if (isa_supported(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

Isa active_isa() { return active().isa.load(); }

void set_isa(Isa isa) {
  const auto* table = table_for(isa);
  if (table == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "ISA " + std::string(isa_name(isa)) + " not available on this host");
  }
  active().table.store(table);
  active().isa.store(isa);
}

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  active().table.load()->gemm_nn(a, b, c, m, k, n, accumulate);
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  active().table.load()->gemm_tn(a, b, c, m, k, n, accumulate);
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  std::vector<double> bt(k * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
  }
  active().table.load()->gemm_nn(a, bt.data(), c, m, k, n, accumulate);
}

void score_blocks(const double* blocks, std::size_t num_blocks, const double* q, std::size_t dim,
                  double* out) {
  active().table.load()->score_blocks(blocks, num_blocks, q, dim, out);
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc = acc + a[i] * b[i];
  return acc;
}

}  // namespace rfv::kernels
