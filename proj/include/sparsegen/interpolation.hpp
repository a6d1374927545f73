#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sparsegen/embedding.hpp"

namespace sparsegen {

// Zero-padded average of two weighted token-embedding matrices, plus its
// placement in the reduced space.
struct InterpolatedEmbedding {
    std::string region_id;
    uint32_t n_dim = 0;
    uint32_t m_tokens = 0;          // max of the two seed token counts
    std::vector<float> matrix;      // column-major, stored single precision
    std::array<std::string, 2> seed_ids;
    ReducedPoint reduced;           // filled by the projection step
};

// Column j scaled by weights[j]; double precision, column-major.
std::vector<double> weighted_matrix(const TokenizedEmbedding& te);

// (pad(weighted(a)) + pad(weighted(b))) / 2 with zero columns appended up to
// max(m_a, m_b). Double precision; seeds must agree on n_dim.
std::vector<double> average_pair_matrix(const TokenizedEmbedding& a, const TokenizedEmbedding& b);

// Same, packaged with provenance and stored as float32.
InterpolatedEmbedding average_pair(const TokenizedEmbedding& a, const TokenizedEmbedding& b,
                                   const std::string& region_id);

// Row sums: the pooled form of a matrix whose columns all carry weight 1.
std::vector<double> pool_with_ones(const float* matrix, uint32_t n_dim, uint32_t m_tokens);

// Pools the stored matrix with all-ones weights and projects it. PCA only;
// t-SNE placements go through a joint refit instead.
ReducedPoint project_interpolated(const Projector& p, const InterpolatedEmbedding& interp);

// EMB1-compatible view (id "interp:<region_id>", unit weights).
TokenizedEmbedding to_tokenized(const InterpolatedEmbedding& interp);

// Pooled vector of the interpolation, for t-SNE joint refits.
PooledVector pooled_interpolation(const InterpolatedEmbedding& interp);

}  // namespace sparsegen
