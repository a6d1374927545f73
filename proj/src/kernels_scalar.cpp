#include "sparsegen/kernels.hpp"

namespace sparsegen::kernels::scalar {

double dot(const double* a, const double* b, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum(const double* x, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double squared_distance(const double* a, const double* b, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void axpy(double* y, double alpha, const double* x, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_f32(double* y, double alpha, const float* x, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += alpha * static_cast<double>(x[i]);
}

void scale(double* x, double alpha, size_t n) {
    for (size_t i = 0; i < n; ++i) x[i] *= alpha;
}

}  // namespace sparsegen::kernels::scalar
