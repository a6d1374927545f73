#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sparsegen/dataset.hpp"
#include "sparsegen/embedding.hpp"
#include "sparsegen/mocks.hpp"

namespace sparsegen {

// Source of per-token embeddings. The contract is the matrix plus the
// attention weights; where they come from is the backend's business.
class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    virtual TokenizedEmbedding embed(const Example& example) = 0;
    virtual std::string name() const = 0;
};

// Serves records from an EMB1 file, keyed by example id.
class FileEmbeddingProvider : public EmbeddingProvider {
  public:
    explicit FileEmbeddingProvider(const std::string& path);
    TokenizedEmbedding embed(const Example& example) override;
    std::string name() const override { return "file"; }

  private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

class MockEmbeddingProvider : public EmbeddingProvider {
  public:
    explicit MockEmbeddingProvider(const MockSpec& spec) : spec_(spec) {}
    TokenizedEmbedding embed(const Example& example) override {
        return mock_embed(example.input, spec_, example.id);
    }
    std::string name() const override { return "mock"; }

  private:
    MockSpec spec_;
};

struct FetchOptions {
    int parallelism = 4;
    int max_attempts = 3;
};

// One embedding per example, order preserved. Per-example retry; a failure
// after retries names the example id. All records must agree on n_dim.
std::vector<TokenizedEmbedding> fetch_embeddings(EmbeddingProvider& provider,
                                                 const std::vector<Example>& examples,
                                                 const FetchOptions& options = {});

}  // namespace sparsegen
