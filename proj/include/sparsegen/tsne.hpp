#pragma once

#include <cstdint>
#include <vector>

#include "sparsegen/embedding.hpp"

namespace sparsegen {

struct TsneParams {
    uint32_t k = 2;
    double perplexity = 30.0;
    uint32_t iterations = 500;
    uint64_t seed = 0;
};

struct TsneResult {
    std::vector<ReducedPoint> points;
    double kl_initial = 0.0;  // KL(P||Q) at the random initialization
    double kl_final = 0.0;    // KL(P||Q) after the last iteration
};

// Exact O(n^2) t-SNE: Gaussian perplexity calibration by bisection,
// symmetrized P, Student-t Q, gradient descent with momentum, adaptive
// per-coordinate gains and an early-exaggeration phase. Deterministic for a
// fixed seed. Intended for at most 5000 points.
TsneResult fit_tsne(const std::vector<PooledVector>& vectors, const TsneParams& params);

}  // namespace sparsegen
