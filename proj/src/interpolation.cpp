#include "sparsegen/interpolation.hpp"

#include <algorithm>

#include "sparsegen/kernels.hpp"
#include "sparsegen/util.hpp"

namespace sparsegen {

std::vector<double> weighted_matrix(const TokenizedEmbedding& te) {
    te.validate();
    std::vector<double> out(size_t(te.n_dim) * te.m_tokens, 0.0);
    for (uint32_t j = 0; j < te.m_tokens; ++j) {
        kernels::axpy_f32(out.data() + size_t(j) * te.n_dim, double(te.weights[j]), te.col(j),
                          te.n_dim);
    }
    return out;
}

std::vector<double> average_pair_matrix(const TokenizedEmbedding& a, const TokenizedEmbedding& b) {
    if (a.n_dim != b.n_dim) {
        throw ConfigError("average_pair: n_dim mismatch (" + std::to_string(a.n_dim) + " vs " +
                          std::to_string(b.n_dim) + ")");
    }
    const uint32_t n = a.n_dim;
    const uint32_t m = std::max(a.m_tokens, b.m_tokens);
    std::vector<double> wa = weighted_matrix(a);
    std::vector<double> wb = weighted_matrix(b);
    std::vector<double> out(size_t(n) * m, 0.0);
    kernels::axpy(out.data(), 0.5, wa.data(), wa.size());
    kernels::axpy(out.data(), 0.5, wb.data(), wb.size());
    return out;
}

InterpolatedEmbedding average_pair(const TokenizedEmbedding& a, const TokenizedEmbedding& b,
                                   const std::string& region_id) {
    std::vector<double> avg = average_pair_matrix(a, b);
    InterpolatedEmbedding out;
    out.region_id = region_id;
    out.n_dim = a.n_dim;
    out.m_tokens = std::max(a.m_tokens, b.m_tokens);
    out.seed_ids = {a.example_id, b.example_id};
    out.matrix.resize(avg.size());
    for (size_t i = 0; i < avg.size(); ++i) out.matrix[i] = static_cast<float>(avg[i]);
    return out;
}

std::vector<double> pool_with_ones(const float* matrix, uint32_t n_dim, uint32_t m_tokens) {
    std::vector<double> acc(n_dim, 0.0);
    for (uint32_t j = 0; j < m_tokens; ++j) {
        kernels::axpy_f32(acc.data(), 1.0, matrix + size_t(j) * n_dim, n_dim);
    }
    return acc;
}

ReducedPoint project_interpolated(const Projector& p, const InterpolatedEmbedding& interp) {
    if (p.kind != ReducerKind::pca) {
        throw ConfigError("project_interpolated: t-SNE placement requires a joint refit");
    }
    std::vector<double> pooled = pool_with_ones(interp.matrix.data(), interp.n_dim,
                                                interp.m_tokens);
    ReducedPoint out;
    out.id = "interp:" + interp.region_id;
    out.coords = project_vector(p, pooled.data(), pooled.size());
    return out;
}

TokenizedEmbedding to_tokenized(const InterpolatedEmbedding& interp) {
    TokenizedEmbedding te;
    te.example_id = "interp:" + interp.region_id;
    te.n_dim = interp.n_dim;
    te.m_tokens = interp.m_tokens;
    te.matrix = interp.matrix;
    te.weights.assign(interp.m_tokens, 1.0f);
    return te;
}

PooledVector pooled_interpolation(const InterpolatedEmbedding& interp) {
    std::vector<double> acc = pool_with_ones(interp.matrix.data(), interp.n_dim, interp.m_tokens);
    PooledVector out;
    out.example_id = "interp:" + interp.region_id;
    out.values.assign(acc.begin(), acc.end());
    return out;
}

}  // namespace sparsegen
