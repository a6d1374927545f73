#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sparsegen/dataset.hpp"
#include "sparsegen/decode.hpp"

namespace sparsegen {

struct TeacherConfig {
    std::string endpoint;  // e.g. "http://host:port/v1/chat/completions"
    std::string model = "teacher";
    double temperature = 0.7;
    uint32_t max_tokens = 512;
    RetryPolicy retry;
};

struct RawGeneration {
    std::string text;
    int attempts = 1;
    int retries = 0;
    std::string model;
};

// Two-seed prompt with the decoded interpolation as the partial example.
std::string build_generation_prompt(const Example& seed1, const Example& seed2,
                                    const std::string& decoded);

// Single-seed prompt for the random-seed comparison runs.
std::string build_baseline_prompt(const Example& seed);

class TeacherClient {
  public:
    virtual ~TeacherClient() = default;
    // Single attempt; throws TransientBackendError when a retry makes sense.
    virtual std::string complete(const std::string& prompt) = 0;
    virtual std::string model_name() const = 0;
};

// Chat-completions style HTTP client.
class HttpTeacherClient : public TeacherClient {
  public:
    explicit HttpTeacherClient(const TeacherConfig& config);
    ~HttpTeacherClient() override;
    std::string complete(const std::string& prompt) override;
    std::string model_name() const override;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Runs the prompt with bounded retries; failure errors carry the prompt
// hash, never the prompt text.
RawGeneration generate(TeacherClient& client, const std::string& prompt,
                       const RetryPolicy& retry);

// Parsed completion plus parse diagnostics.
struct ParsedGeneration {
    SyntheticExample example;
    std::vector<std::string> warnings;
    std::string final_marker_form;  // "tagged" ("### <final_answer> v") or "bare" ("### v")
};

// Extracts question / answer / final answer from a "### Question ...
// ### Answer ... ### <value>" completion. Throws ParseError (raw text
// retained) when the grammar is not met.
ParsedGeneration parse_synthetic(const RawGeneration& raw, const Provenance& provenance,
                                 const std::string& id);

// Canonical completion layout for a synthetic example; parse_synthetic
// recovers the three fields as long as none of them contains a line
// starting with "###".
std::string format_synthetic(const SyntheticExample& ex);

// Quality findings (empty list = clean): empty fields, verbatim seed
// duplication, too-short answer, final answer not derived in the answer.
std::vector<std::string> validate_example(const SyntheticExample& ex,
                                          const std::vector<Example>& seeds);

}  // namespace sparsegen
