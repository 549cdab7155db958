#define SCD_GEMM_NS isa_scalar
#include "gemm_kernels.inl"
