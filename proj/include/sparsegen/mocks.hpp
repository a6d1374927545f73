#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sparsegen/decode.hpp"
#include "sparsegen/embedding.hpp"
#include "sparsegen/generation.hpp"

namespace sparsegen {

// Deterministic stand-ins for the three model-backed services. Everything
// here is a pure function of (input, seed), so a fully mocked pipeline run
// is a pure function of (dataset, config).

struct MockSpec {
    uint32_t n_dim = 64;
    uint64_t seed = 0;
};

// Whitespace tokenization; each distinct token maps to a fixed
// hash-seeded pseudorandom unit column; uniform attention weights 1/m.
TokenizedEmbedding mock_embed(const std::string& text, const MockSpec& spec,
                              const std::string& example_id = "");

// Looks up the two seed input texts named in a decode request id.
using SeedTextResolver = std::function<std::optional<std::pair<std::string, std::string>>(
    const std::string& seed1_id, const std::string& seed2_id)>;

SeedTextResolver make_seed_text_resolver(const std::vector<Example>& dataset);

// Deterministic decode stand-in: fuses the first half of seed1's text with
// the second half of seed2's text and appends a hash tag of the injected
// matrix. The response text carries a leading "Output:" marker, which the
// client strips. Throws BackendError with a "protocol error" message when
// the request is malformed (the HTTP wrapper maps that to a 400).
DecodeResponse mock_decode(const DecodeRequest& req, const SeedTextResolver& resolver);

// Deterministic teacher stand-in. Recognizes the two-seed and the baseline
// prompt scaffolds, extracts the seed content, and emits a well-formed
// "### Question ... ### Answer ... ### <value>" completion.
std::string mock_teacher(const std::string& prompt);

class MockDecodeClient : public DecodeClient {
  public:
    explicit MockDecodeClient(SeedTextResolver resolver) : resolver_(std::move(resolver)) {}
    DecodeResponse decode(const DecodeRequest& req) override { return mock_decode(req, resolver_); }

  private:
    SeedTextResolver resolver_;
};

class MockTeacherClient : public TeacherClient {
  public:
    std::string complete(const std::string& prompt) override { return mock_teacher(prompt); }
    std::string model_name() const override { return "mock-teacher"; }
};

}  // namespace sparsegen
