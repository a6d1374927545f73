#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sparsegen {

// Per-token embedding matrix plus attention weights for one example.
// The matrix is column-major: column j is the n_dim-vector of token j.
struct TokenizedEmbedding {
    std::string example_id;
    uint32_t n_dim = 0;
    uint32_t m_tokens = 0;
    std::vector<float> matrix;   // n_dim * m_tokens, column-major
    std::vector<float> weights;  // m_tokens

    const float* col(uint32_t j) const { return matrix.data() + size_t(j) * n_dim; }
    void validate() const;  // throws ConfigError on any invariant violation
};

struct PooledVector {
    std::string example_id;
    std::vector<float> values;  // n_dim
};

enum class ReducerKind { pca, tsne };

// Fitted dimensionality reducer. PCA projectors carry an affine map
// (mean + orthonormal component rows); t-SNE has fitted coordinates only
// and cannot transform new vectors.
struct Projector {
    ReducerKind kind = ReducerKind::pca;
    uint32_t k_dim = 0;
    uint32_t n_dim = 0;
    std::vector<double> mean;         // n_dim
    std::vector<double> components;   // k_dim x n_dim, row-major, orthonormal rows
    std::vector<double> eigenvalues;  // k_dim, descending (captured variance)

    const double* component(uint32_t r) const { return components.data() + size_t(r) * n_dim; }
};

struct ReducedPoint {
    std::string id;
    std::vector<double> coords;  // k_dim
};

// Attention-weighted sum of token embeddings: matrix * weights.
// Accumulated in double, stored as float32.
PooledVector pool(const TokenizedEmbedding& te);

// Principal axes of the mean-centered data via covariance eigendecomposition
// (cyclic Jacobi, double precision). Rows are unit-norm with the
// largest-magnitude entry made positive; ties take the first such entry.
// Requires at least k+1 vectors of equal length; throws ConfigError naming
// the effective rank when the data cannot support k components.
Projector fit_pca(const std::vector<PooledVector>& vectors, uint32_t k);

// coords = components * (v - mean). PCA projectors only.
ReducedPoint project(const Projector& p, const PooledVector& v);

// Same map applied to a raw double vector of length p.n_dim.
std::vector<double> project_vector(const Projector& p, const double* v, size_t n);

// Eigendecomposition of a symmetric matrix (row-major n x n), eigenvalues
// descending, eigenvectors as rows of `vectors`. Exposed for reuse by the
// PCA path; cyclic Jacobi with a fixed sweep schedule, so deterministic.
void symmetric_eigen(const std::vector<double>& matrix, size_t n,
                     std::vector<double>& values, std::vector<double>& vectors);

}  // namespace sparsegen
