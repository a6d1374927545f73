#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "sparsegen/dataset.hpp"
#include "sparsegen/interpolation.hpp"

namespace sparsegen {

// One call against the decode service: the copy/rephrase prompt plus the
// embedding matrix that gets injected after the prompt's own embeddings.
struct DecodeRequest {
    std::string request_id;
    std::string prompt;
    uint32_t n_dim = 0;
    uint32_t m_tokens = 0;
    std::vector<float> matrix;  // column-major
    uint32_t max_tokens = 256;
    double temperature = 0.0;
};

struct DecodeResponse {
    std::string text;
    uint32_t prompt_tokens = 0;
    uint32_t generated_tokens = 0;
};

// Copy/rephrase prompt with exactly four few-shot slots. Ends with "Input:"
// so the injected embedding continues the sequence.
std::string build_decode_prompt(const std::vector<Example>& few_shot);

// Wire codec for POST /v1/decode. The matrix travels as base64 of
// little-endian float32 values in column-major order, bit-exact.
nlohmann::ordered_json decode_request_to_json(const DecodeRequest& req);
DecodeRequest decode_request_from_json(const nlohmann::json& j);
nlohmann::ordered_json decode_response_to_json(const DecodeResponse& resp);
DecodeResponse decode_response_from_json(const nlohmann::json& j);

struct RetryPolicy {
    int max_attempts = 3;
    int initial_backoff_ms = 100;  // doubles per retry
};

class DecodeClient {
  public:
    virtual ~DecodeClient() = default;
    // Single attempt; throws TransientBackendError for retryable failures.
    virtual DecodeResponse decode(const DecodeRequest& req) = 0;
};

// Talks to a /v1/decode endpoint, e.g. "http://127.0.0.1:8900".
class HttpDecodeClient : public DecodeClient {
  public:
    explicit HttpDecodeClient(const std::string& base_url);
    ~HttpDecodeClient() override;
    DecodeResponse decode(const DecodeRequest& req) override;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct DecodeConfig {
    uint32_t max_tokens = 256;
    double temperature = 0.0;
    RetryPolicy retry;
    std::vector<Example> few_shot;  // exactly 4
};

// Stable request id for an interpolation; retries reuse it so the server can
// deduplicate.
std::string decode_request_id(const InterpolatedEmbedding& interp);

// Builds the request for an interpolated embedding, sends it with bounded
// retries and exponential backoff, and returns the text stripped of any
// leading "Output:" marker. Errors carry the region id.
std::string decode_interpolation(DecodeClient& client, const InterpolatedEmbedding& interp,
                                 const DecodeConfig& config);

}  // namespace sparsegen
