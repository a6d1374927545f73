#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "sparsegen/kernels.hpp"
#include "sparsegen/util.hpp"

using namespace sparsegen;

namespace {

const std::vector<size_t> kSizes = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 100, 1023};

std::vector<double> random_doubles(Rng& rng, size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.unit() * 2.0 - 1.0;
    return v;
}

bool close_rel(double a, double b, double rel) {
    double scale = std::max({std::abs(a), std::abs(b), 1.0});
    return std::abs(a - b) <= rel * scale;
}

}  // namespace

TEST_CASE("scalar kernels match a plain loop") {
    Rng rng(7);
    for (size_t n : kSizes) {
        auto a = random_doubles(rng, n);
        auto b = random_doubles(rng, n);
        double dot_ref = 0.0, sum_ref = 0.0, sq_ref = 0.0;
        for (size_t i = 0; i < n; ++i) {
            dot_ref += a[i] * b[i];
            sum_ref += a[i];
            double d = a[i] - b[i];
            sq_ref += d * d;
        }
        CHECK(kernels::scalar::dot(a.data(), b.data(), n) == doctest::Approx(dot_ref).epsilon(1e-14));
        CHECK(kernels::scalar::sum(a.data(), n) == doctest::Approx(sum_ref).epsilon(1e-14));
        CHECK(kernels::scalar::squared_distance(a.data(), b.data(), n) ==
              doctest::Approx(sq_ref).epsilon(1e-14));
    }
}

#if SPARSEGEN_HAVE_AVX2_KERNELS
TEST_CASE("avx2 kernels agree with the scalar reference") {
    if (std::string(kernels::active_backend()) != "avx2") {
        return;  // CPU without AVX2 (or forced scalar); nothing to compare
    }
    Rng rng(11);
    for (size_t n : kSizes) {
        auto a = random_doubles(rng, n);
        auto b = random_doubles(rng, n);
        std::vector<float> af(n);
        for (size_t i = 0; i < n; ++i) af[i] = float(a[i]);

        CHECK(close_rel(kernels::avx2::dot(a.data(), b.data(), n),
                        kernels::scalar::dot(a.data(), b.data(), n), 1e-12));
        CHECK(close_rel(kernels::avx2::sum(a.data(), n), kernels::scalar::sum(a.data(), n),
                        1e-12));
        CHECK(close_rel(kernels::avx2::squared_distance(a.data(), b.data(), n),
                        kernels::scalar::squared_distance(a.data(), b.data(), n), 1e-12));

        auto y1 = random_doubles(rng, n);
        auto y2 = y1;
        kernels::avx2::axpy(y1.data(), 0.37, b.data(), n);
        kernels::scalar::axpy(y2.data(), 0.37, b.data(), n);
        for (size_t i = 0; i < n; ++i) CHECK(close_rel(y1[i], y2[i], 1e-15));

        auto z1 = random_doubles(rng, n);
        auto z2 = z1;
        kernels::avx2::axpy_f32(z1.data(), -1.25, af.data(), n);
        kernels::scalar::axpy_f32(z2.data(), -1.25, af.data(), n);
        for (size_t i = 0; i < n; ++i) CHECK(close_rel(z1[i], z2[i], 1e-15));

        auto s1 = random_doubles(rng, n);
        auto s2 = s1;
        kernels::avx2::scale(s1.data(), 3.5, n);
        kernels::scalar::scale(s2.data(), 3.5, n);
        for (size_t i = 0; i < n; ++i) CHECK(s1[i] == s2[i]);
    }
}
#endif

TEST_CASE("dispatched kernels agree with the scalar reference") {
    Rng rng(13);
    for (size_t n : kSizes) {
        auto a = random_doubles(rng, n);
        auto b = random_doubles(rng, n);
        CHECK(close_rel(kernels::dot(a.data(), b.data(), n),
                        kernels::scalar::dot(a.data(), b.data(), n), 1e-12));
        CHECK(close_rel(kernels::squared_distance(a.data(), b.data(), n),
                        kernels::scalar::squared_distance(a.data(), b.data(), n), 1e-12));
    }
}

TEST_CASE("squared_distance consistency with dot") {
    Rng rng(17);
    auto a = random_doubles(rng, 129);
    auto b = random_doubles(rng, 129);
    std::vector<double> diff(129);
    for (size_t i = 0; i < 129; ++i) diff[i] = a[i] - b[i];
    CHECK(close_rel(kernels::squared_distance(a.data(), b.data(), 129),
                    kernels::dot(diff.data(), diff.data(), 129), 1e-12));
    CHECK(kernels::squared_distance(a.data(), a.data(), 129) == 0.0);
}
