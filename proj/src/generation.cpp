#include "sparsegen/generation.hpp"

#include <chrono>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "sparsegen/util.hpp"

namespace sparsegen {

namespace {

constexpr const char* kGenerationPromptTemplate =
    R"(You are a data generator for synthetic math reasoning problems.
You will be given two examples of math reasoning problems in a
specific format, along with a partial synthetic example, and
your task is to generate a new problem that creatively combines
elements of the two examples, and solidifies the partial example
into a legitimate math reasoning problem with a legitimate
solution.


Format:

- Start the question with "### Question".
- Start the answer with "### Answer".
- Provide the final answer prefixed with "### <final_answer>".

Instructions:

- The new problem should conceptually lie in the middle of the two
   given examples, and follow the outline of the partial example.
- Combine themes or elements from both problems to create a coherent
   and challenging math reasoning problem. It has to be related to
   the seed examples, and cannot be an unrelated random problem.
- Ensure that the problem adheres to the format provided.
- Do not use the same names or numbers, only use the concepts,
   topics and problem types.


Seed Examples to base the new sample on:

Example 1:
### Question

{q1}

### Answer

{a1}

Example 2:
### Question

{q2}

### Answer

{a2}

Partial Example:
{interpolated_decoded_text}

Your Task:

Generate a new math reasoning problem that combines the elements of
Example 1 and Example 2 above, and solidifies the Partial Example
into a real math reasoning problem. The new example HAS to have
elements from the above two seed examples, it cannot be an unrelated
random math problem. Follow the format exactly and ensure the problem
is clear and solvable. Only respond with one new example, and preface
the question with ### Question and the answer with ### Answer.


Generated example:
)";

constexpr const char* kBaselinePromptTemplate =
    R"(You are a data generator for synthetic math reasoning problems.
You will be given an example math reasoning problem in a specific
format, and your task is to generate a new problem that that is
similar to the example problem, and convert it into a
legitimate math reasoning problem with a legitimate solution.

Format:

- Start the question with "### Question".
- Start the answer with "### Answer".
- Provide the final answer prefixed with "### <final_answer>".

Instructions:

- The new problem should conceptually be similar to the example problem.
- Create a coherent and challenging math problem.
- Ensure that the problem adheres to the format provided.
- Do not use the same names or numbers, only use the concepts, topics and problem types.


Seed Example to base the new sample on:


Example:
### Question
{q1}

### Answer
{a1}

Your Task:

Generate a new math reasoning problem similar to the example problem
above. The new example HAS to be similar to the example, it cannot be
an unrelated random math problem. Follow the format exactly and ensure
the problem is clear and solvable. Only respond with one new example,
and preface the question with ### Question and the answer with
### Answer.

Generated example:
)";

void replace_slot(std::string& text, const std::string& slot, const std::string& value) {
    size_t pos = text.find(slot);
    while (pos != std::string::npos) {
        text.replace(pos, slot.size(), value);
        pos = text.find(slot, pos + value.size());
    }
}

constexpr const char* kQuestionMarker = "### Question";
constexpr const char* kAnswerMarker = "### Answer";
constexpr const char* kFinalTag = "<final_answer>";

}  // namespace

std::string build_generation_prompt(const Example& seed1, const Example& seed2,
                                    const std::string& decoded) {
    for (const Example* seed : {&seed1, &seed2}) {
        if (trim(seed->input).empty()) {
            throw ConfigError("generation prompt: empty question in seed " + seed->id);
        }
        if (trim(seed->output).empty()) {
            throw ConfigError("generation prompt: empty answer in seed " + seed->id);
        }
    }
    if (trim(decoded).empty()) {
        throw ConfigError("generation prompt: empty decoded text");
    }
    std::string prompt = kGenerationPromptTemplate;
    replace_slot(prompt, "{q1}", seed1.input);
    replace_slot(prompt, "{a1}", seed1.output);
    replace_slot(prompt, "{q2}", seed2.input);
    replace_slot(prompt, "{a2}", seed2.output);
    replace_slot(prompt, "{interpolated_decoded_text}", decoded);
    return prompt;
}

std::string build_baseline_prompt(const Example& seed) {
    if (trim(seed.input).empty()) {
        throw ConfigError("baseline prompt: empty question in seed " + seed.id);
    }
    if (trim(seed.output).empty()) {
        throw ConfigError("baseline prompt: empty answer in seed " + seed.id);
    }
    std::string prompt = kBaselinePromptTemplate;
    replace_slot(prompt, "{q1}", seed.input);
    replace_slot(prompt, "{a1}", seed.output);
    return prompt;
}

struct HttpTeacherClient::Impl {
    explicit Impl(const TeacherConfig& cfg) : config(cfg) {
        size_t scheme = cfg.endpoint.find("://");
        if (scheme == std::string::npos) {
            throw ConfigError("teacher endpoint must be a URL: " + cfg.endpoint);
        }
        size_t path_start = cfg.endpoint.find('/', scheme + 3);
        if (path_start == std::string::npos) {
            base = cfg.endpoint;
            path = "/v1/chat/completions";
        } else {
            base = cfg.endpoint.substr(0, path_start);
            path = cfg.endpoint.substr(path_start);
        }
        client = std::make_unique<httplib::Client>(base.c_str());
        client->set_connection_timeout(10);
        client->set_read_timeout(300);
    }
    TeacherConfig config;
    std::string base, path;
    std::unique_ptr<httplib::Client> client;
};

HttpTeacherClient::HttpTeacherClient(const TeacherConfig& config)
    : impl_(std::make_unique<Impl>(config)) {}

HttpTeacherClient::~HttpTeacherClient() = default;

std::string HttpTeacherClient::model_name() const { return impl_->config.model; }

std::string HttpTeacherClient::complete(const std::string& prompt) {
    nlohmann::ordered_json body;
    body["model"] = impl_->config.model;
    body["messages"] = nlohmann::ordered_json::array(
        {nlohmann::ordered_json{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = impl_->config.temperature;
    body["max_tokens"] = impl_->config.max_tokens;

    auto res = impl_->client->Post(impl_->path.c_str(), body.dump(), "application/json");
    if (!res) {
        throw TransientBackendError("teacher: connection failed (" +
                                    httplib::to_string(res.error()) + ")");
    }
    if (res->status >= 500) {
        throw TransientBackendError("teacher: server error " + std::to_string(res->status));
    }
    if (res->status != 200) {
        throw BackendError("teacher: HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
        auto j = nlohmann::json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("teacher: malformed response: ") + e.what());
    }
}

RawGeneration generate(TeacherClient& client, const std::string& prompt,
                       const RetryPolicy& retry) {
    const int attempts = std::max(retry.max_attempts, 1);
    int backoff = retry.initial_backoff_ms;
    for (int attempt = 1;; ++attempt) {
        try {
            std::string text = client.complete(prompt);
            if (trim(text).empty()) {
                throw BackendError("teacher: empty completion (prompt fnv1a64:" +
                                   hex64(fnv1a64(prompt)) + ")");
            }
            RawGeneration out;
            out.text = std::move(text);
            out.attempts = attempt;
            out.retries = attempt - 1;
            out.model = client.model_name();
            return out;
        } catch (const TransientBackendError& e) {
            if (attempt >= attempts) {
                throw BackendError("teacher failed after " + std::to_string(attempt) +
                                   " attempts (prompt fnv1a64:" + hex64(fnv1a64(prompt)) +
                                   "): " + e.what());
            }
            if (backoff > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
                backoff *= 2;
            }
        }
    }
}

namespace {

// Positions where a line begins with "###" within [from, to).
std::vector<size_t> marker_positions(const std::string& text, size_t from, size_t to) {
    std::vector<size_t> out;
    size_t pos = from;
    while (pos < to) {
        size_t hit = text.find("###", pos);
        if (hit == std::string::npos || hit >= to) break;
        if (hit == 0 || text[hit - 1] == '\n') out.push_back(hit);
        pos = hit + 3;
    }
    return out;
}

}  // namespace

ParsedGeneration parse_synthetic(const RawGeneration& raw, const Provenance& provenance,
                                 const std::string& id) {
    const std::string& text = raw.text;
    ParsedGeneration out;

    size_t q_pos = text.find(kQuestionMarker);
    if (q_pos == std::string::npos) {
        throw ParseError("missing ### Question", text);
    }
    size_t q_body = q_pos + std::strlen(kQuestionMarker);
    size_t next_q = text.find(kQuestionMarker, q_body);
    if (next_q != std::string::npos) {
        out.warnings.push_back("multiple question blocks; using the first");
    }
    const size_t block_end = next_q == std::string::npos ? text.size() : next_q;

    size_t a_pos = text.find(kAnswerMarker, q_body);
    if (a_pos == std::string::npos || a_pos >= block_end) {
        throw ParseError("missing ### Answer", text);
    }
    size_t a_body = a_pos + std::strlen(kAnswerMarker);

    std::vector<size_t> markers = marker_positions(text, a_body, block_end);
    if (markers.empty()) {
        throw ParseError("missing final answer", text);
    }
    size_t marker = markers.back();
    size_t value_pos = marker + 3;
    std::string rest = text.substr(value_pos, block_end - value_pos);
    std::string value = trim(rest);
    if (starts_with(value, kFinalTag)) {
        out.final_marker_form = "tagged";
        value = trim(value.substr(std::strlen(kFinalTag)));
    } else {
        out.final_marker_form = "bare";
        // Tolerate extra '#' ("#### 42" style completions).
        size_t i = 0;
        while (i < value.size() && (value[i] == '#' || value[i] == ' ')) ++i;
        value = value.substr(i);
    }
    if (size_t nl = value.find('\n'); nl != std::string::npos) {
        value = trim(value.substr(0, nl));
    }
    if (value.empty()) {
        throw ParseError("missing final answer", text);
    }

    out.example.id = id;
    out.example.question = trim(text.substr(q_body, a_pos - q_body));
    out.example.answer = trim(text.substr(a_body, marker - a_body));
    out.example.final_answer = value;
    out.example.provenance = provenance;
    return out;
}

std::string format_synthetic(const SyntheticExample& ex) {
    std::string out;
    out += kQuestionMarker;
    out += "\n";
    out += ex.question;
    out += "\n\n";
    out += kAnswerMarker;
    out += "\n";
    out += ex.answer;
    out += "\n\n### ";
    out += kFinalTag;
    out += " ";
    out += ex.final_answer;
    out += "\n";
    return out;
}

std::vector<std::string> validate_example(const SyntheticExample& ex,
                                          const std::vector<Example>& seeds) {
    std::vector<std::string> findings;
    if (ex.question.empty()) findings.push_back("empty question");
    if (ex.answer.empty()) findings.push_back("empty answer");
    if (ex.final_answer.empty()) findings.push_back("empty final answer");
    for (const auto& seed : seeds) {
        if (!ex.question.empty() && ex.question == seed.input) {
            findings.push_back("duplicates seed " + seed.id);
        }
    }
    if (!ex.answer.empty() && ex.answer.size() < 10) {
        findings.push_back("answer too short");
    }
    if (!ex.answer.empty() && !ex.final_answer.empty() &&
        ex.answer.find(ex.final_answer) == std::string::npos) {
        findings.push_back("final answer not derived in answer");
    }
    return findings;
}

}  // namespace sparsegen
