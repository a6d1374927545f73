#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sparsegen/dataset.hpp"
#include "sparsegen/embedding.hpp"
#include "sparsegen/util.hpp"

namespace testutil {

// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static std::atomic<uint64_t> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("sparsegen_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline sparsegen::TokenizedEmbedding random_embedding(sparsegen::Rng& rng, const std::string& id,
                                                      uint32_t n_dim, uint32_t m_tokens,
                                                      bool uniform_weights = true) {
    sparsegen::TokenizedEmbedding te;
    te.example_id = id;
    te.n_dim = n_dim;
    te.m_tokens = m_tokens;
    te.matrix.resize(size_t(n_dim) * m_tokens);
    for (auto& v : te.matrix) v = float(rng.unit() * 2.0 - 1.0);
    if (uniform_weights) {
        te.weights.assign(m_tokens, 1.0f / float(m_tokens));
    } else {
        te.weights.resize(m_tokens);
        for (auto& w : te.weights) w = float(rng.unit());
    }
    return te;
}

// Clustered math-flavored seed pool: `topics` tight vocabulary clusters plus
// a band of bridge examples that mix two topic vocabularies, which is what
// puts thinly-populated cells between the dense cluster cells.
inline std::vector<sparsegen::Example> clustered_dataset(size_t n, size_t topics, uint64_t seed) {
    sparsegen::Rng rng(seed);
    std::vector<sparsegen::Example> out;
    out.reserve(n);
    const size_t bridges = n / 5;
    for (size_t i = 0; i < n; ++i) {
        std::string text;
        if (i < bridges) {
            size_t a = rng.below(topics);
            size_t b = (a + 1 + rng.below(topics - 1)) % topics;
            double mix = 0.2 + 0.6 * rng.unit();
            for (size_t w = 0; w < 12; ++w) {
                size_t topic = rng.unit() < mix ? a : b;
                text += "topic" + std::to_string(topic) + "word" + std::to_string(rng.below(6)) +
                        " ";
            }
        } else {
            size_t topic = rng.below(topics);
            for (size_t w = 0; w < 12; ++w) {
                text += "topic" + std::to_string(topic) + "word" + std::to_string(rng.below(6)) +
                        " ";
            }
        }
        sparsegen::Example ex;
        ex.id = "ex-" + std::to_string(i);
        ex.input = "If a worker packs " + std::to_string(2 + rng.below(40)) + " boxes of " + text +
                   "how many are packed in total?";
        ex.output = "Multiply the rate by the count; the total is " +
                    std::to_string(10 + rng.below(400)) + ".";
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace testutil
