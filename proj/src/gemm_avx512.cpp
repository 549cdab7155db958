#define SCD_GEMM_NS isa_avx512
#include "gemm_kernels.inl"
