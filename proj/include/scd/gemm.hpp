#pragma once

namespace scd {

// Kernel selection for the hand-rolled GEMM below. Auto picks the widest ISA
// the CPU supports; the explicit levels exist so tests can cover every path.
enum class IsaLevel { Scalar = 0, Avx2 = 1, Avx512 = 2, Auto = 3 };

IsaLevel detect_isa();

// C (M x N, row-major) = A (M x K) * B (K x N), optionally accumulating into C.
//
// Library BLAS was measured 4-6x slower than these kernels on the narrow-N
// matrices produced by convolutions over 1/16-resolution feature grids
// (N = H/16 * W/16, typically 16), which dominate the training step.
template <typename T>
void gemm_nn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate, IsaLevel isa = IsaLevel::Auto);

// C (M x N) = A^T * B where A is stored (K x M) row-major.
template <typename T>
void gemm_tn(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc,
             bool accumulate, IsaLevel isa = IsaLevel::Auto);

}  // namespace scd
