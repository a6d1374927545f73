#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sparsegen/tsne.hpp"
#include "sparsegen/util.hpp"

using namespace sparsegen;

namespace {

// Two well-separated 16-dim Gaussian blobs, 50 points each.
std::vector<PooledVector> two_blobs(uint64_t seed) {
    Rng rng(seed);
    std::vector<PooledVector> out;
    for (int blob = 0; blob < 2; ++blob) {
        for (int i = 0; i < 50; ++i) {
            PooledVector v;
            v.example_id = (blob == 0 ? "a" : "b") + std::to_string(i);
            v.values.resize(16);
            for (auto& x : v.values) {
                x = float(rng.gaussian() + (blob == 0 ? 0.0 : 12.0));
            }
            out.push_back(std::move(v));
        }
    }
    return out;
}

double same_blob_nn_fraction(const std::vector<ReducedPoint>& pts) {
    size_t hits = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        double best = 0.0;
        size_t best_j = i;
        for (size_t j = 0; j < pts.size(); ++j) {
            if (j == i) continue;
            double d = 0.0;
            for (size_t k = 0; k < pts[i].coords.size(); ++k) {
                double diff = pts[i].coords[k] - pts[j].coords[k];
                d += diff * diff;
            }
            if (best_j == i || d < best) {
                best = d;
                best_j = j;
            }
        }
        if (pts[i].id[0] == pts[best_j].id[0]) ++hits;
    }
    return double(hits) / double(pts.size());
}

}  // namespace

TEST_CASE("fit_tsne separates two blobs and improves its objective") {
    auto data = two_blobs(42);
    TsneParams params;
    params.k = 2;
    params.perplexity = 10;
    params.iterations = 400;
    params.seed = 9;
    auto result = fit_tsne(data, params);
    REQUIRE(result.points.size() == data.size());
    CHECK(same_blob_nn_fraction(result.points) >= 0.95);
    CHECK(result.kl_final < result.kl_initial);
}

TEST_CASE("fit_tsne is deterministic for a fixed seed") {
    auto data = two_blobs(7);
    TsneParams params;
    params.k = 2;
    params.perplexity = 12;
    params.iterations = 150;
    params.seed = 31;
    auto r1 = fit_tsne(data, params);
    auto r2 = fit_tsne(data, params);
    REQUIRE(r1.points.size() == r2.points.size());
    for (size_t i = 0; i < r1.points.size(); ++i) {
        CHECK(r1.points[i].coords == r2.points[i].coords);
    }
    CHECK(r1.kl_final == r2.kl_final);
}

TEST_CASE("fit_tsne validates the perplexity window") {
    auto data = two_blobs(3);  // n = 100
    TsneParams params;
    params.perplexity = 4.0;  // below 5
    CHECK_THROWS_AS(fit_tsne(data, params), ConfigError);
    params.perplexity = 40.0;  // >= n/3
    CHECK_THROWS_AS(fit_tsne(data, params), ConfigError);
    params.perplexity = 33.0;  // just inside
    CHECK_NOTHROW(fit_tsne(data, {2, 33.0, 5, 0}));
}
