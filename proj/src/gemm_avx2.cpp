#define SCD_GEMM_NS isa_avx2
#include "gemm_kernels.inl"
