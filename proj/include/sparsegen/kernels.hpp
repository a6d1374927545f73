#pragma once

#include <cstddef>

// Data-parallel inner loops shared by the numeric stages: pooling, covariance
// accumulation, projection and pairwise distances. Every kernel exists as a
// scalar reference implementation plus an AVX2 variant; the top-level entry
// points dispatch once at startup based on what the CPU reports.
//
// The scalar versions are the semantic definition. The vector versions may
// reassociate sums (and use FMA), so results can differ from scalar in the
// last bits; equivalence tests bound that difference.

namespace sparsegen::kernels {

namespace scalar {
double dot(const double* a, const double* b, size_t n);
double sum(const double* x, size_t n);
double squared_distance(const double* a, const double* b, size_t n);
// y += alpha * x
void axpy(double* y, double alpha, const double* x, size_t n);
// y += alpha * x, widening float input to double before accumulating
void axpy_f32(double* y, double alpha, const float* x, size_t n);
void scale(double* x, double alpha, size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define SPARSEGEN_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, size_t n);
double sum(const double* x, size_t n);
double squared_distance(const double* a, const double* b, size_t n);
void axpy(double* y, double alpha, const double* x, size_t n);
void axpy_f32(double* y, double alpha, const float* x, size_t n);
void scale(double* x, double alpha, size_t n);
}  // namespace avx2
#else
#define SPARSEGEN_HAVE_AVX2_KERNELS 0
#endif

// Dispatched entry points.
double dot(const double* a, const double* b, size_t n);
double sum(const double* x, size_t n);
double squared_distance(const double* a, const double* b, size_t n);
void axpy(double* y, double alpha, const double* x, size_t n);
void axpy_f32(double* y, double alpha, const float* x, size_t n);
void scale(double* x, double alpha, size_t n);

// "avx2" or "scalar". Honors SPARSEGEN_KERNELS=scalar|avx2 in the environment
// (requesting avx2 on a CPU without it falls back to scalar).
const char* active_backend();

}  // namespace sparsegen::kernels
