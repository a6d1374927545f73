#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sparsegen/embedding.hpp"
#include "sparsegen/pipeline.hpp"
#include "sparsegen/util.hpp"

#if SPARSEGEN_TESTS_HAVE_EIGEN
#include <Eigen/Dense>
#endif

using namespace sparsegen;

TEST_CASE("pool: single token with weight 1 returns the column") {
    TokenizedEmbedding te;
    te.example_id = "x";
    te.n_dim = 3;
    te.m_tokens = 1;
    te.matrix = {1.5f, -2.0f, 0.25f};
    te.weights = {1.0f};
    auto p = pool(te);
    CHECK(p.values == std::vector<float>{1.5f, -2.0f, 0.25f});
}

TEST_CASE("pool: 2x2 weighted sum") {
    TokenizedEmbedding te;
    te.example_id = "x";
    te.n_dim = 2;
    te.m_tokens = 2;
    te.matrix = {1.0f, 2.0f, 3.0f, 4.0f};  // columns (1,2) and (3,4)
    te.weights = {0.5f, 0.5f};
    auto p = pool(te);
    CHECK(p.values[0] == doctest::Approx(2.0));
    CHECK(p.values[1] == doctest::Approx(3.0));
}

TEST_CASE("pool matches a plain double mat-vec") {
    Rng rng(3);
    auto te = testutil::random_embedding(rng, "r", 8, 5, false);
    auto p = pool(te);
    for (uint32_t i = 0; i < te.n_dim; ++i) {
        double expect = 0.0;
        for (uint32_t j = 0; j < te.m_tokens; ++j) {
            expect += double(te.matrix[j * te.n_dim + i]) * double(te.weights[j]);
        }
        CHECK(double(p.values[i]) == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("pool is linear in the weights") {
    Rng rng(5);
    auto te = testutil::random_embedding(rng, "r", 16, 7, false);
    auto w1 = te.weights;
    TokenizedEmbedding te2 = te;
    for (auto& w : te2.weights) w = float(rng.unit());
    TokenizedEmbedding te_sum = te;
    for (size_t j = 0; j < te.weights.size(); ++j) {
        te_sum.weights[j] = te.weights[j] + te2.weights[j];
    }
    auto pa = pool(te);
    auto pb = pool(te2);
    auto ps = pool(te_sum);
    for (uint32_t i = 0; i < te.n_dim; ++i) {
        CHECK(double(pa.values[i]) + double(pb.values[i]) ==
              doctest::Approx(double(ps.values[i])).epsilon(1e-6));
    }
}

TEST_CASE("pool rejects inconsistent shapes") {
    TokenizedEmbedding te;
    te.example_id = "bad";
    te.n_dim = 2;
    te.m_tokens = 2;
    te.matrix = {1, 2, 3};  // short one entry
    te.weights = {0.5f, 0.5f};
    CHECK_THROWS_AS(pool(te), ConfigError);
}

namespace {

std::vector<PooledVector> to_pooled(const std::vector<std::vector<double>>& rows) {
    std::vector<PooledVector> out;
    for (size_t i = 0; i < rows.size(); ++i) {
        PooledVector v;
        v.example_id = "p" + std::to_string(i);
        v.values.assign(rows[i].begin(), rows[i].end());
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace

TEST_CASE("fit_pca: collinear data recovers the line direction") {
    std::vector<std::vector<double>> rows;
    for (int i = -5; i <= 5; ++i) rows.push_back({double(i), 2.0 * i});
    auto p = fit_pca(to_pooled(rows), 1);
    const double s = 1.0 / std::sqrt(5.0);
    CHECK(std::abs(p.component(0)[0]) == doctest::Approx(s).epsilon(1e-6));
    CHECK(std::abs(p.component(0)[1]) == doctest::Approx(2.0 * s).epsilon(1e-6));
    // Sign convention: the largest-magnitude entry is positive.
    CHECK(p.component(0)[1] > 0.0);
}

TEST_CASE("fit_pca: rank-deficient data errors with the effective rank") {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 10; ++i) rows.push_back({double(i % 2), double(i % 2), 0.0});
    try {
        fit_pca(to_pooled(rows), 2);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("rank 1") != std::string::npos);
    }
}

TEST_CASE("fit_pca: k in {2,3} accepted by config validation, k=4 rejected") {
    RunConfig cfg;
    cfg.dataset_path = "x.jsonl";
    cfg.k = 3;
    validate_config(cfg);
    cfg.k = 4;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

#if SPARSEGEN_TESTS_HAVE_EIGEN
TEST_CASE("fit_pca components match an Eigen eigendecomposition oracle") {
    Rng rng(101);
    for (int trial = 0; trial < 5; ++trial) {
        const size_t n = 100, dim = 16, k = 3;
        // Decaying per-axis scales keep the spectrum well separated so the
        // axis matching below is meaningful.
        std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
        for (auto& row : rows) {
            for (size_t d = 0; d < dim; ++d) {
                row[d] = rng.gaussian() * std::pow(0.7, double(d)) + 0.5;
            }
        }
        auto pooled = to_pooled(rows);
        auto p = fit_pca(pooled, k);

        Eigen::MatrixXd data(n, dim);
        for (size_t i = 0; i < n; ++i) {
            for (size_t d = 0; d < dim; ++d) data(i, d) = double(pooled[i].values[d]);
        }
        Eigen::RowVectorXd mean = data.colwise().mean();
        Eigen::MatrixXd centered = data.rowwise() - mean;
        Eigen::MatrixXd cov = centered.transpose() * centered / double(n - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        REQUIRE(es.info() == Eigen::Success);

        for (size_t r = 0; r < k; ++r) {
            Eigen::VectorXd oracle_axis = es.eigenvectors().col(dim - 1 - r);
            double cos = 0.0;
            for (size_t d = 0; d < dim; ++d) cos += oracle_axis(d) * p.component(r)[d];
            CHECK(std::abs(cos) >= 0.999);
        }
    }
}
#endif

TEST_CASE("PCA rows are orthonormal and variances non-increasing") {
    Rng rng(77);
    std::vector<std::vector<double>> rows(60, std::vector<double>(12));
    for (auto& row : rows) {
        for (size_t d = 0; d < 12; ++d) row[d] = rng.gaussian() * (1.0 + double(12 - d));
    }
    auto p = fit_pca(to_pooled(rows), 3);
    for (uint32_t a = 0; a < 3; ++a) {
        for (uint32_t b = 0; b < 3; ++b) {
            double dot = 0.0;
            for (uint32_t d = 0; d < 12; ++d) dot += p.component(a)[d] * p.component(b)[d];
            CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-6));
        }
    }
    CHECK(p.eigenvalues.size() == 3);
    CHECK(p.eigenvalues[0] >= p.eigenvalues[1]);
    CHECK(p.eigenvalues[1] >= p.eigenvalues[2]);
}

TEST_CASE("project: centering, affinity and the mat-vec oracle") {
    // Integer-valued data keeps the float32 storage exact, so the affine
    // identities below hold to double precision.
    std::vector<std::vector<double>> rows;
    Rng rng(19);
    for (int i = 0; i < 40; ++i) {
        std::vector<double> row(6);
        for (auto& v : row) v = double(int(rng.below(64))) - 32.0;
        rows.push_back(row);
    }
    auto pooled = to_pooled(rows);
    auto p = fit_pca(pooled, 2);

    PooledVector at_mean;
    at_mean.example_id = "mean";
    bool mean_exact = true;
    at_mean.values.resize(p.n_dim);
    for (uint32_t d = 0; d < p.n_dim; ++d) {
        at_mean.values[d] = float(p.mean[d]);
        if (double(at_mean.values[d]) != p.mean[d]) mean_exact = false;
    }
    auto zero = project(p, at_mean);
    for (double c : zero.coords) {
        CHECK(std::abs(c) <= (mean_exact ? 1e-12 : 1e-5));
    }

    // project(a) + project(b) == 2 * project((a+b)/2)
    PooledVector a = pooled[0], b = pooled[1], mid;
    mid.example_id = "mid";
    mid.values.resize(p.n_dim);
    for (uint32_t d = 0; d < p.n_dim; ++d) {
        mid.values[d] = (a.values[d] + b.values[d]) / 2.0f;
    }
    auto pa = project(p, a), pb = project(p, b), pm = project(p, mid);
    for (uint32_t d = 0; d < 2; ++d) {
        CHECK(pa.coords[d] + pb.coords[d] - 2.0 * pm.coords[d] ==
              doctest::Approx(0.0).epsilon(1e-6));
    }

    // Independent centered mat-vec.
    for (uint32_t r = 0; r < 2; ++r) {
        double expect = 0.0;
        for (uint32_t d = 0; d < p.n_dim; ++d) {
            expect += p.component(r)[d] * (double(a.values[d]) - p.mean[d]);
        }
        CHECK(pa.coords[r] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("project rejects t-SNE projectors and length mismatches") {
    Projector p;
    p.kind = ReducerKind::tsne;
    p.k_dim = 2;
    p.n_dim = 4;
    PooledVector v;
    v.values = {1, 2, 3, 4};
    CHECK_THROWS_AS(project(p, v), ConfigError);

    std::vector<std::vector<double>> rows(5, std::vector<double>{1, 2, 3});
    rows[1] = {2, 3, 4};
    rows[2] = {0, 1, 5};
    rows[3] = {4, 4, 4};
    rows[4] = {1, 0, 2};
    auto pca = fit_pca(to_pooled(rows), 2);
    PooledVector wrong;
    wrong.values = {1, 2};
    CHECK_THROWS_AS(project(pca, wrong), ConfigError);
}
