#include "sparsegen/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace sparsegen::kernels {

namespace {

struct Table {
    double (*dot)(const double*, const double*, size_t);
    double (*sum)(const double*, size_t);
    double (*squared_distance)(const double*, const double*, size_t);
    void (*axpy)(double*, double, const double*, size_t);
    void (*axpy_f32)(double*, double, const float*, size_t);
    void (*scale)(double*, double, size_t);
    const char* name;
};

constexpr Table kScalar{scalar::dot,  scalar::sum,      scalar::squared_distance,
                        scalar::axpy, scalar::axpy_f32, scalar::scale,
                        "scalar"};

#if SPARSEGEN_HAVE_AVX2_KERNELS
constexpr Table kAvx2{avx2::dot,  avx2::sum,      avx2::squared_distance,
                      avx2::axpy, avx2::axpy_f32, avx2::scale,
                      "avx2"};

bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}
#endif

const Table& select() {
    const char* forced = std::getenv("SPARSEGEN_KERNELS");
    if (forced && std::strcmp(forced, "scalar") == 0) return kScalar;
#if SPARSEGEN_HAVE_AVX2_KERNELS
    if (cpu_has_avx2()) return kAvx2;
#endif
    return kScalar;
}

const Table& table() {
    static const Table& t = select();
    return t;
}

}  // namespace

double dot(const double* a, const double* b, size_t n) { return table().dot(a, b, n); }
double sum(const double* x, size_t n) { return table().sum(x, n); }
double squared_distance(const double* a, const double* b, size_t n) {
    return table().squared_distance(a, b, n);
}
void axpy(double* y, double alpha, const double* x, size_t n) { table().axpy(y, alpha, x, n); }
void axpy_f32(double* y, double alpha, const float* x, size_t n) {
    table().axpy_f32(y, alpha, x, n);
}
void scale(double* x, double alpha, size_t n) { table().scale(x, alpha, n); }

const char* active_backend() { return table().name; }

}  // namespace sparsegen::kernels
