#include "sparsegen/providers.hpp"

#include <unordered_map>

#include "sparsegen/emb_io.hpp"
#include "sparsegen/util.hpp"

namespace sparsegen {

struct FileEmbeddingProvider::Impl {
    std::unordered_map<std::string, TokenizedEmbedding> by_id;
};

FileEmbeddingProvider::FileEmbeddingProvider(const std::string& path)
    : impl_(std::make_shared<Impl>()) {
    for (auto& te : read_emb1(path)) {
        std::string id = te.example_id;
        if (!impl_->by_id.emplace(id, std::move(te)).second) {
            throw ConfigError("embedding file " + path + ": duplicate id " + id);
        }
    }
}

TokenizedEmbedding FileEmbeddingProvider::embed(const Example& example) {
    auto it = impl_->by_id.find(example.id);
    if (it == impl_->by_id.end()) {
        throw BackendError("embedding file has no record for example " + example.id);
    }
    return it->second;
}

std::vector<TokenizedEmbedding> fetch_embeddings(EmbeddingProvider& provider,
                                                 const std::vector<Example>& examples,
                                                 const FetchOptions& options) {
    std::vector<TokenizedEmbedding> out(examples.size());
    const int attempts = std::max(options.max_attempts, 1);
    parallel_for_index(examples.size(), options.parallelism, [&](size_t i) {
        for (int attempt = 1;; ++attempt) {
            try {
                out[i] = provider.embed(examples[i]);
                out[i].validate();
                return;
            } catch (const TransientBackendError& e) {
                if (attempt >= attempts) {
                    throw BackendError("embedding failed for example " + examples[i].id + ": " +
                                       e.what());
                }
            }
        }
    });
    for (size_t i = 1; i < out.size(); ++i) {
        if (out[i].n_dim != out[0].n_dim) {
            throw BackendError("inconsistent embedding dimensionality: example " +
                               out[i].example_id + " has n_dim " + std::to_string(out[i].n_dim) +
                               ", expected " + std::to_string(out[0].n_dim));
        }
    }
    return out;
}

}  // namespace sparsegen
