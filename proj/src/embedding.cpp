#include "sparsegen/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sparsegen/kernels.hpp"
#include "sparsegen/util.hpp"

namespace sparsegen {

void TokenizedEmbedding::validate() const {
    if (n_dim < 1) throw ConfigError("embedding " + example_id + ": n_dim must be >= 1");
    if (m_tokens < 1) throw ConfigError("embedding " + example_id + ": m_tokens must be >= 1");
    if (matrix.size() != size_t(n_dim) * m_tokens) {
        throw ConfigError("embedding " + example_id + ": matrix size " +
                          std::to_string(matrix.size()) + " != n_dim*m_tokens");
    }
    if (weights.size() != m_tokens) {
        throw ConfigError("embedding " + example_id + ": weights length " +
                          std::to_string(weights.size()) + " != m_tokens");
    }
    for (float w : weights) {
        if (!std::isfinite(w)) {
            throw ConfigError("embedding " + example_id + ": non-finite weight");
        }
    }
}

PooledVector pool(const TokenizedEmbedding& te) {
    te.validate();
    std::vector<double> acc(te.n_dim, 0.0);
    for (uint32_t j = 0; j < te.m_tokens; ++j) {
        kernels::axpy_f32(acc.data(), static_cast<double>(te.weights[j]), te.col(j), te.n_dim);
    }
    PooledVector out;
    out.example_id = te.example_id;
    out.values.resize(te.n_dim);
    for (uint32_t i = 0; i < te.n_dim; ++i) out.values[i] = static_cast<float>(acc[i]);
    return out;
}

void symmetric_eigen(const std::vector<double>& matrix, size_t n,
                     std::vector<double>& values, std::vector<double>& vectors) {
    std::vector<double> a = matrix;  // working copy, row-major
    vectors.assign(n * n, 0.0);
    for (size_t i = 0; i < n; ++i) vectors[i * n + i] = 1.0;

    auto off_norm = [&] {
        double s = 0.0;
        for (size_t p = 0; p < n; ++p)
            for (size_t q = p + 1; q < n; ++q) s += a[p * n + q] * a[p * n + q];
        return s;
    };
    double frob = 0.0;
    for (double v : a) frob += v * v;
    const double tol = frob * 1e-28 + 1e-300;

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps && off_norm() > tol; ++sweep) {
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                double apq = a[p * n + q];
                if (apq == 0.0) continue;
                double app = a[p * n + p];
                double aqq = a[q * n + q];
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (size_t i = 0; i < n; ++i) {
                    double aip = a[i * n + p];
                    double aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for (size_t i = 0; i < n; ++i) {
                    double api = a[p * n + i];
                    double aqi = a[q * n + i];
                    a[p * n + i] = c * api - s * aqi;
                    a[q * n + i] = s * api + c * aqi;
                }
                for (size_t i = 0; i < n; ++i) {
                    double vip = vectors[p * n + i];
                    double viq = vectors[q * n + i];
                    vectors[p * n + i] = c * vip - s * viq;
                    vectors[q * n + i] = s * vip + c * viq;
                }
            }
        }
    }

    values.resize(n);
    for (size_t i = 0; i < n; ++i) values[i] = a[i * n + i];

    // Sort descending by eigenvalue; stable order for equal values.
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t x, size_t y) { return values[x] > values[y]; });
    std::vector<double> sorted_vals(n);
    std::vector<double> sorted_vecs(n * n);
    for (size_t r = 0; r < n; ++r) {
        sorted_vals[r] = values[order[r]];
        std::copy_n(vectors.begin() + order[r] * n, n, sorted_vecs.begin() + r * n);
    }
    values = std::move(sorted_vals);
    vectors = std::move(sorted_vecs);
}

Projector fit_pca(const std::vector<PooledVector>& vectors, uint32_t k) {
    if (k < 1) throw ConfigError("fit_pca: k must be >= 1");
    if (vectors.size() < size_t(k) + 1) {
        throw ConfigError("fit_pca: need at least k+1 vectors, got " +
                          std::to_string(vectors.size()));
    }
    const size_t n = vectors[0].values.size();
    if (n < k) throw ConfigError("fit_pca: dimensionality below k");
    for (const auto& v : vectors) {
        if (v.values.size() != n) {
            throw ConfigError("fit_pca: inconsistent vector length at " + v.example_id);
        }
    }

    std::vector<double> mean(n, 0.0);
    for (const auto& v : vectors) {
        kernels::axpy_f32(mean.data(), 1.0, v.values.data(), n);
    }
    kernels::scale(mean.data(), 1.0 / double(vectors.size()), n);

    // Sample covariance, accumulated row by row.
    std::vector<double> cov(n * n, 0.0);
    std::vector<double> centered(n);
    for (const auto& v : vectors) {
        for (size_t i = 0; i < n; ++i) centered[i] = double(v.values[i]) - mean[i];
        for (size_t i = 0; i < n; ++i) {
            kernels::axpy(cov.data() + i * n, centered[i], centered.data(), n);
        }
    }
    kernels::scale(cov.data(), 1.0 / double(vectors.size() - 1), n * n);

    std::vector<double> evals, evecs;
    symmetric_eigen(cov, n, evals, evecs);

    const double lead = std::max(evals[0], 0.0);
    size_t rank = 0;
    for (double v : evals) {
        if (v > lead * 1e-9 && v > 1e-300) ++rank;
    }
    if (rank < k) {
        throw ConfigError("fit_pca: rank-deficient data, effective rank " +
                          std::to_string(rank) + " < k=" + std::to_string(k));
    }

    Projector p;
    p.kind = ReducerKind::pca;
    p.k_dim = k;
    p.n_dim = static_cast<uint32_t>(n);
    p.mean = std::move(mean);
    p.components.resize(size_t(k) * n);
    p.eigenvalues.assign(evals.begin(), evals.begin() + k);
    for (uint32_t r = 0; r < k; ++r) {
        double* row = p.components.data() + size_t(r) * n;
        std::copy_n(evecs.begin() + size_t(r) * n, n, row);
        double norm = std::sqrt(kernels::dot(row, row, n));
        kernels::scale(row, 1.0 / norm, n);
        // Sign convention: first largest-magnitude entry positive.
        size_t arg = 0;
        for (size_t i = 1; i < n; ++i) {
            if (std::abs(row[i]) > std::abs(row[arg])) arg = i;
        }
        if (row[arg] < 0.0) kernels::scale(row, -1.0, n);
    }
    return p;
}

std::vector<double> project_vector(const Projector& p, const double* v, size_t n) {
    if (p.kind != ReducerKind::pca) {
        throw ConfigError("project: t-SNE projector has no out-of-sample transform");
    }
    if (n != p.n_dim) {
        throw ConfigError("project: vector length " + std::to_string(n) + " != n_dim " +
                          std::to_string(p.n_dim));
    }
    std::vector<double> centered(n);
    for (size_t i = 0; i < n; ++i) centered[i] = v[i] - p.mean[i];
    std::vector<double> coords(p.k_dim);
    for (uint32_t r = 0; r < p.k_dim; ++r) {
        coords[r] = kernels::dot(p.component(r), centered.data(), n);
    }
    return coords;
}

ReducedPoint project(const Projector& p, const PooledVector& v) {
    std::vector<double> asdouble(v.values.begin(), v.values.end());
    ReducedPoint out;
    out.id = v.example_id;
    out.coords = project_vector(p, asdouble.data(), asdouble.size());
    return out;
}

}  // namespace sparsegen
