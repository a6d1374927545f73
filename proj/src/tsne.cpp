#include "sparsegen/tsne.hpp"

#include <algorithm>
#include <cmath>

#include "sparsegen/kernels.hpp"
#include "sparsegen/util.hpp"

namespace sparsegen {

namespace {

constexpr double kProbFloor = 1e-12;

// Squared Euclidean distances between all pairs of rows.
std::vector<double> pairwise_sq(const std::vector<double>& data, size_t n, size_t dim) {
    std::vector<double> d(n * n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            double v = kernels::squared_distance(data.data() + i * dim, data.data() + j * dim, dim);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    return d;
}

// Row-wise binary search for the Gaussian bandwidth matching log(perplexity).
std::vector<double> calibrate_p(const std::vector<double>& dist_sq, size_t n, double perplexity) {
    const double log_u = std::log(perplexity);
    std::vector<double> p(n * n, 0.0);
    std::vector<double> row(n);
    for (size_t i = 0; i < n; ++i) {
        double beta = 1.0;
        double beta_lo = -1.0;  // negative = unbounded
        double beta_hi = -1.0;
        for (int iter = 0; iter < 64; ++iter) {
            double sum_p = 0.0;
            double sum_dp = 0.0;
            for (size_t j = 0; j < n; ++j) {
                if (j == i) {
                    row[j] = 0.0;
                    continue;
                }
                double e = std::exp(-beta * dist_sq[i * n + j]);
                row[j] = e;
                sum_p += e;
                sum_dp += dist_sq[i * n + j] * e;
            }
            if (sum_p <= 0.0) sum_p = 1e-300;
            double entropy = std::log(sum_p) + beta * sum_dp / sum_p;
            double diff = entropy - log_u;
            if (std::abs(diff) < 1e-5) break;
            if (diff > 0) {
                beta_lo = beta;
                beta = (beta_hi < 0) ? beta * 2.0 : (beta_lo + beta_hi) / 2.0;
            } else {
                beta_hi = beta;
                beta = (beta_lo < 0) ? beta / 2.0 : (beta_lo + beta_hi) / 2.0;
            }
        }
        double sum_p = 0.0;
        for (size_t j = 0; j < n; ++j) sum_p += row[j];
        if (sum_p <= 0.0) sum_p = 1e-300;
        for (size_t j = 0; j < n; ++j) p[i * n + j] = row[j] / sum_p;
    }
    return p;
}

struct QField {
    std::vector<double> num;  // 1 / (1 + d^2), zero diagonal
    double z = 0.0;           // sum of num
};

QField compute_q(const std::vector<double>& y, size_t n, size_t k) {
    QField q;
    q.num.assign(n * n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            double d = kernels::squared_distance(y.data() + i * k, y.data() + j * k, k);
            double v = 1.0 / (1.0 + d);
            q.num[i * n + j] = v;
            q.num[j * n + i] = v;
            q.z += 2.0 * v;
        }
    }
    if (q.z <= 0.0) q.z = 1e-300;
    return q;
}

double kl_divergence(const std::vector<double>& p, const QField& q, size_t n) {
    double kl = 0.0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double pij = p[i * n + j];
            if (pij <= 0.0) continue;
            double qij = std::max(q.num[i * n + j] / q.z, kProbFloor);
            kl += pij * std::log(pij / qij);
        }
    }
    return kl;
}

}  // namespace

TsneResult fit_tsne(const std::vector<PooledVector>& vectors, const TsneParams& params) {
    const size_t n = vectors.size();
    if (n > 5000) throw ConfigError("fit_tsne: at most 5000 points (exact method)");
    if (n < 4) throw ConfigError("fit_tsne: need at least 4 points");
    if (params.k < 1 || params.k > 3) throw ConfigError("fit_tsne: k must be 1..3");
    if (params.iterations < 1) throw ConfigError("fit_tsne: iterations must be >= 1");
    if (!(params.perplexity >= 5.0 && params.perplexity < double(n) / 3.0)) {
        throw ConfigError("fit_tsne: perplexity must satisfy 5 <= perplexity < n/3 (n=" +
                          std::to_string(n) + ")");
    }

    const size_t dim = vectors[0].values.size();
    std::vector<double> data(n * dim);
    for (size_t i = 0; i < n; ++i) {
        if (vectors[i].values.size() != dim) {
            throw ConfigError("fit_tsne: inconsistent vector length at " + vectors[i].example_id);
        }
        for (size_t d = 0; d < dim; ++d) data[i * dim + d] = vectors[i].values[d];
    }

    std::vector<double> dist = pairwise_sq(data, n, dim);
    std::vector<double> p = calibrate_p(dist, n, params.perplexity);
    // Symmetrize and normalize to a joint distribution.
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            double v = (p[i * n + j] + p[j * n + i]) / (2.0 * double(n));
            v = std::max(v, kProbFloor);
            p[i * n + j] = v;
            p[j * n + i] = v;
        }
        p[i * n + i] = 0.0;
    }

    const size_t k = params.k;
    Rng rng(params.seed);
    std::vector<double> y(n * k);
    for (auto& v : y) v = rng.gaussian() * 1e-4;

    TsneResult result;
    result.kl_initial = kl_divergence(p, compute_q(y, n, k), n);

    const uint32_t exaggeration_end = std::min<uint32_t>(250, params.iterations / 2);
    const double exaggeration = 12.0;
    const double eta = 200.0;
    std::vector<double> update(n * k, 0.0);
    std::vector<double> gains(n * k, 1.0);
    std::vector<double> grad(n * k);

    for (uint32_t iter = 0; iter < params.iterations; ++iter) {
        const double p_scale = iter < exaggeration_end ? exaggeration : 1.0;
        const double momentum = iter < 250 ? 0.5 : 0.8;
        QField q = compute_q(y, n, k);

        std::fill(grad.begin(), grad.end(), 0.0);
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                double num = q.num[i * n + j];
                double coeff = 4.0 * (p_scale * p[i * n + j] - num / q.z) * num;
                for (size_t d = 0; d < k; ++d) {
                    grad[i * k + d] += coeff * (y[i * k + d] - y[j * k + d]);
                }
            }
        }

        for (size_t c = 0; c < n * k; ++c) {
            bool same_sign = (grad[c] > 0.0) == (update[c] > 0.0);
            gains[c] = same_sign ? std::max(gains[c] * 0.8, 0.01) : gains[c] + 0.2;
            update[c] = momentum * update[c] - eta * gains[c] * grad[c];
            y[c] += update[c];
        }
        // Keep the embedding centered.
        for (size_t d = 0; d < k; ++d) {
            double mean = 0.0;
            for (size_t i = 0; i < n; ++i) mean += y[i * k + d];
            mean /= double(n);
            for (size_t i = 0; i < n; ++i) y[i * k + d] -= mean;
        }
    }

    result.kl_final = kl_divergence(p, compute_q(y, n, k), n);
    result.points.resize(n);
    for (size_t i = 0; i < n; ++i) {
        result.points[i].id = vectors[i].example_id;
        result.points[i].coords.assign(y.begin() + i * k, y.begin() + (i + 1) * k);
    }
    return result;
}

}  // namespace sparsegen
