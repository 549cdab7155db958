#include "scd/gemm.hpp"

namespace scd {

namespace detail {

#define SCD_DECLARE_GEMM_NS(ns)                                                                  \
  namespace ns {                                                                                 \
    template <typename T>                                                                        \
    void gemm_nn_k(int, int, int, const T*, int, const T*, int, T*, int, bool);                  \
    template <typename T>                                                                        \
    void gemm_tn_k(int, int, int, const T*, int, const T*, int, T*, int, bool);                  \
  }

SCD_DECLARE_GEMM_NS(isa_scalar)
SCD_DECLARE_GEMM_NS(isa_avx2)
SCD_DECLARE_GEMM_NS(isa_avx512)

#undef SCD_DECLARE_GEMM_NS

}  // namespace detail

IsaLevel detect_isa() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx512f")) return IsaLevel::Avx512;
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return IsaLevel::Avx2;
#endif
  return IsaLevel::Scalar;
}

static IsaLevel resolve(IsaLevel isa) {
  static const IsaLevel best = detect_isa();
  if (isa == IsaLevel::Auto) return best;
  return isa;
}

template <typename T>
void gemm_nn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate, IsaLevel isa) {
  switch (resolve(isa)) {
    case IsaLevel::Avx512:
      detail::isa_avx512::gemm_nn_k<T>(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
      break;
    case IsaLevel::Avx2:
      detail::isa_avx2::gemm_nn_k<T>(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
      break;
    default:
      detail::isa_scalar::gemm_nn_k<T>(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
      break;
  }
}

template <typename T>
void gemm_tn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate, IsaLevel isa) {
  switch (resolve(isa)) {
    case IsaLevel::Avx512:
      detail::isa_avx512::gemm_tn_k<T>(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
      break;
    case IsaLevel::Avx2:
      detail::isa_avx2::gemm_tn_k<T>(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
      break;
    default:
      detail::isa_scalar::gemm_tn_k<T>(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
      break;
  }
}

template void gemm_nn<float>(int, int, int, const float*, int, const float*, int, float*, int,
                             bool, IsaLevel);
template void gemm_nn<double>(int, int, int, const double*, int, const double*, int, double*, int,
                              bool, IsaLevel);
template void gemm_tn<float>(int, int, int, const float*, int, const float*, int, float*, int,
                             bool, IsaLevel);
template void gemm_tn<double>(int, int, int, const double*, int, const double*, int, double*, int,
                              bool, IsaLevel);

}  // namespace scd
