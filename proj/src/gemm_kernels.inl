// Kernel bodies shared by the per-ISA translation units. Each TU defines
// SCD_GEMM_NS and is compiled with the matching -m flags; the preprocessor
// selects the widest vector wrapper available to that TU.

#include <cstddef>

#if defined(__AVX512F__) || defined(__AVX2__)
#include <immintrin.h>
#define SCD_GEMM_SIMD 1
#endif

namespace scd::detail::SCD_GEMM_NS {

#if defined(__AVX512F__)

struct VecF {
  using V = __m512;
  static constexpr int W = 16;
  static V zero() { return _mm512_setzero_ps(); }
  static V load(const float* p) { return _mm512_loadu_ps(p); }
  static void store(float* p, V v) { _mm512_storeu_ps(p, v); }
  static V set1(float x) { return _mm512_set1_ps(x); }
  static V fmadd(V a, V b, V c) { return _mm512_fmadd_ps(a, b, c); }
  static V add(V a, V b) { return _mm512_add_ps(a, b); }
};

struct VecD {
  using V = __m512d;
  static constexpr int W = 8;
  static V zero() { return _mm512_setzero_pd(); }
  static V load(const double* p) { return _mm512_loadu_pd(p); }
  static void store(double* p, V v) { _mm512_storeu_pd(p, v); }
  static V set1(double x) { return _mm512_set1_pd(x); }
  static V fmadd(V a, V b, V c) { return _mm512_fmadd_pd(a, b, c); }
  static V add(V a, V b) { return _mm512_add_pd(a, b); }
};

#elif defined(__AVX2__)

struct VecF {
  using V = __m256;
  static constexpr int W = 8;
  static V zero() { return _mm256_setzero_ps(); }
  static V load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, V v) { _mm256_storeu_ps(p, v); }
  static V set1(float x) { return _mm256_set1_ps(x); }
  static V fmadd(V a, V b, V c) { return _mm256_fmadd_ps(a, b, c); }
  static V add(V a, V b) { return _mm256_add_ps(a, b); }
};

struct VecD {
  using V = __m256d;
  static constexpr int W = 4;
  static V zero() { return _mm256_setzero_pd(); }
  static V load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, V v) { _mm256_storeu_pd(p, v); }
  static V set1(double x) { return _mm256_set1_pd(x); }
  static V fmadd(V a, V b, V c) { return _mm256_fmadd_pd(a, b, c); }
  static V add(V a, V b) { return _mm256_add_pd(a, b); }
};

#endif

template <typename T>
static void nn_scalar_patch(int m0, int m1, int n0, int n1, int k, const T* a, int lda,
                            const T* b, int ldb, T* c, int ldc, bool accumulate) {
  for (int m = m0; m < m1; ++m) {
    for (int n = n0; n < n1; ++n) {
      T acc = T(0);
      const T* arow = a + static_cast<std::size_t>(m) * lda;
      for (int kk = 0; kk < k; ++kk) acc += arow[kk] * b[static_cast<std::size_t>(kk) * ldb + n];
      T* cp = c + static_cast<std::size_t>(m) * ldc + n;
      *cp = accumulate ? *cp + acc : acc;
    }
  }
}

template <typename T>
static void tn_scalar_patch(int m0, int m1, int n0, int n1, int k, const T* a, int lda,
                            const T* b, int ldb, T* c, int ldc, bool accumulate) {
  for (int m = m0; m < m1; ++m) {
    for (int n = n0; n < n1; ++n) {
      T acc = T(0);
      for (int kk = 0; kk < k; ++kk)
        acc += a[static_cast<std::size_t>(kk) * lda + m] * b[static_cast<std::size_t>(kk) * ldb + n];
      T* cp = c + static_cast<std::size_t>(m) * ldc + n;
      *cp = accumulate ? *cp + acc : acc;
    }
  }
}

#ifdef SCD_GEMM_SIMD

// C strip of VT::W columns, 8 rows of A at a time, broadcast-FMA over k.
// TN reads the A operand column-wise: a_at(i, k) = A[k*lda + m+i], which is
// contiguous in i, so both layouts use the same register pattern.
template <typename T, typename VT, bool TransA>
static void simd_kernel(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c,
                        int ldc, bool accumulate) {
  constexpr int W = VT::W;
  using V = typename VT::V;
  const auto aval = [&](int row, int kk) -> T {
    if constexpr (TransA)
      return a[static_cast<std::size_t>(kk) * lda + row];
    else
      return a[static_cast<std::size_t>(row) * lda + kk];
  };
  int ns = 0;
  for (; ns + W <= n; ns += W) {
    int ms = 0;
    for (; ms + 8 <= m; ms += 8) {
      V a0 = VT::zero(), a1 = VT::zero(), a2 = VT::zero(), a3 = VT::zero();
      V a4 = VT::zero(), a5 = VT::zero(), a6 = VT::zero(), a7 = VT::zero();
      for (int kk = 0; kk < k; ++kk) {
        V bv = VT::load(b + static_cast<std::size_t>(kk) * ldb + ns);
        a0 = VT::fmadd(VT::set1(aval(ms + 0, kk)), bv, a0);
        a1 = VT::fmadd(VT::set1(aval(ms + 1, kk)), bv, a1);
        a2 = VT::fmadd(VT::set1(aval(ms + 2, kk)), bv, a2);
        a3 = VT::fmadd(VT::set1(aval(ms + 3, kk)), bv, a3);
        a4 = VT::fmadd(VT::set1(aval(ms + 4, kk)), bv, a4);
        a5 = VT::fmadd(VT::set1(aval(ms + 5, kk)), bv, a5);
        a6 = VT::fmadd(VT::set1(aval(ms + 6, kk)), bv, a6);
        a7 = VT::fmadd(VT::set1(aval(ms + 7, kk)), bv, a7);
      }
      V regs[8] = {a0, a1, a2, a3, a4, a5, a6, a7};
      for (int i = 0; i < 8; ++i) {
        T* cp = c + static_cast<std::size_t>(ms + i) * ldc + ns;
        VT::store(cp, accumulate ? VT::add(VT::load(cp), regs[i]) : regs[i]);
      }
    }
    for (; ms < m; ++ms) {
      V acc = VT::zero();
      for (int kk = 0; kk < k; ++kk)
        acc = VT::fmadd(VT::set1(aval(ms, kk)), VT::load(b + static_cast<std::size_t>(kk) * ldb + ns), acc);
      T* cp = c + static_cast<std::size_t>(ms) * ldc + ns;
      VT::store(cp, accumulate ? VT::add(VT::load(cp), acc) : acc);
    }
  }
  if (ns < n) {
    if constexpr (TransA)
      tn_scalar_patch<T>(0, m, ns, n, k, a, lda, b, ldb, c, ldc, accumulate);
    else
      nn_scalar_patch<T>(0, m, ns, n, k, a, lda, b, ldb, c, ldc, accumulate);
  }
}

template <typename T>
struct VecFor;
template <>
struct VecFor<float> {
  using type = VecF;
};
template <>
struct VecFor<double> {
  using type = VecD;
};

#endif  // SCD_GEMM_SIMD

template <typename T>
void gemm_nn_k(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
               bool accumulate) {
#ifdef SCD_GEMM_SIMD
  simd_kernel<T, typename VecFor<T>::type, false>(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
#else
  nn_scalar_patch<T>(0, m, 0, n, k, a, lda, b, ldb, c, ldc, accumulate);
#endif
}

template <typename T>
void gemm_tn_k(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
               bool accumulate) {
#ifdef SCD_GEMM_SIMD
  simd_kernel<T, typename VecFor<T>::type, true>(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
#else
  tn_scalar_patch<T>(0, m, 0, n, k, a, lda, b, ldb, c, ldc, accumulate);
#endif
}

template void gemm_nn_k<float>(int, int, int, const float*, int, const float*, int, float*, int, bool);
template void gemm_nn_k<double>(int, int, int, const double*, int, const double*, int, double*, int, bool);
template void gemm_tn_k<float>(int, int, int, const float*, int, const float*, int, float*, int, bool);
template void gemm_tn_k<double>(int, int, int, const double*, int, const double*, int, double*, int, bool);

}  // namespace scd::detail::SCD_GEMM_NS
