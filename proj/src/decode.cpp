#include "sparsegen/decode.hpp"

#include <bit>
#include <chrono>
#include <thread>

#include "httplib.h"
#include "sparsegen/util.hpp"

namespace sparsegen {

namespace {

constexpr const char* kDecodePromptTemplate =
    R"(You are a cautious assistant. You carefully follow instructions.
You are helpful and harmless and you follow ethical guidelines and
promote positive behavior.

Please copy or rephrase the input text.

Use the following format:
  Input: the input text to copy
  Output: the copy of the input text

Your response should only include the answer. Do not provide any
further explanation.

Here are some examples, complete only the last one:

Input: {Example 1}
Output: {Example 1}

Input: {Example 2}
Output: {Example 2}

Input: {Example 3}
Output: {Example 3}

Input: {Example 4}
Output: {Example 4}

Now copy or rephrase the following input text.
Do not try to solve the problem described in the input text.
Just copy or rephrase the following input text.
Input:)";

void replace_all(std::string& text, const std::string& slot, const std::string& value) {
    size_t pos = 0;
    while ((pos = text.find(slot, pos)) != std::string::npos) {
        text.replace(pos, slot.size(), value);
        pos += value.size();
    }
}

}  // namespace

std::string build_decode_prompt(const std::vector<Example>& few_shot) {
    if (few_shot.size() != 4) {
        throw ConfigError("decode prompt: expected exactly 4 few-shot examples, got " +
                          std::to_string(few_shot.size()));
    }
    std::string prompt = kDecodePromptTemplate;
    for (size_t i = 0; i < 4; ++i) {
        if (trim(few_shot[i].input).empty()) {
            throw ConfigError("decode prompt: empty few-shot example at slot " +
                              std::to_string(i + 1));
        }
        replace_all(prompt, "{Example " + std::to_string(i + 1) + "}", few_shot[i].input);
    }
    return prompt;
}

nlohmann::ordered_json decode_request_to_json(const DecodeRequest& req) {
    if (req.matrix.size() != size_t(req.n_dim) * req.m_tokens) {
        throw ConfigError("decode request: matrix size does not match n_dim*m_tokens");
    }
    std::string bytes;
    bytes.reserve(req.matrix.size() * 4);
    for (float f : req.matrix) {
        uint32_t v = std::bit_cast<uint32_t>(f);
        bytes.push_back(char(v & 0xff));
        bytes.push_back(char((v >> 8) & 0xff));
        bytes.push_back(char((v >> 16) & 0xff));
        bytes.push_back(char((v >> 24) & 0xff));
    }
    nlohmann::ordered_json j;
    j["request_id"] = req.request_id;
    j["prompt"] = req.prompt;
    j["n_dim"] = req.n_dim;
    j["m_tokens"] = req.m_tokens;
    j["matrix_b64"] = base64_encode(bytes.data(), bytes.size());
    j["max_tokens"] = req.max_tokens;
    j["temperature"] = req.temperature;
    return j;
}

DecodeRequest decode_request_from_json(const nlohmann::json& j) {
    DecodeRequest req;
    try {
        req.request_id = j.at("request_id").get<std::string>();
        req.prompt = j.at("prompt").get<std::string>();
        req.n_dim = j.at("n_dim").get<uint32_t>();
        req.m_tokens = j.at("m_tokens").get<uint32_t>();
        req.max_tokens = j.at("max_tokens").get<uint32_t>();
        req.temperature = j.at("temperature").get<double>();
        std::vector<uint8_t> bytes = base64_decode(j.at("matrix_b64").get<std::string>());
        if (bytes.size() != size_t(req.n_dim) * req.m_tokens * 4) {
            throw ConfigError("decode request: matrix_b64 length does not match n_dim*m_tokens");
        }
        req.matrix.resize(bytes.size() / 4);
        for (size_t i = 0; i < req.matrix.size(); ++i) {
            uint32_t v = uint32_t(bytes[4 * i]) | uint32_t(bytes[4 * i + 1]) << 8 |
                         uint32_t(bytes[4 * i + 2]) << 16 | uint32_t(bytes[4 * i + 3]) << 24;
            req.matrix[i] = std::bit_cast<float>(v);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("decode request: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("decode request: ") + e.what());
    }
    return req;
}

nlohmann::ordered_json decode_response_to_json(const DecodeResponse& resp) {
    nlohmann::ordered_json j;
    j["text"] = resp.text;
    j["prompt_tokens"] = resp.prompt_tokens;
    j["generated_tokens"] = resp.generated_tokens;
    return j;
}

DecodeResponse decode_response_from_json(const nlohmann::json& j) {
    DecodeResponse resp;
    try {
        resp.text = j.at("text").get<std::string>();
        resp.prompt_tokens = j.value("prompt_tokens", 0u);
        resp.generated_tokens = j.value("generated_tokens", 0u);
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("decode response: ") + e.what());
    }
    return resp;
}

struct HttpDecodeClient::Impl {
    explicit Impl(const std::string& base_url) : client(base_url.c_str()) {
        client.set_connection_timeout(10);
        client.set_read_timeout(120);
    }
    httplib::Client client;
};

HttpDecodeClient::HttpDecodeClient(const std::string& base_url)
    : impl_(std::make_unique<Impl>(base_url)) {}

HttpDecodeClient::~HttpDecodeClient() = default;

DecodeResponse HttpDecodeClient::decode(const DecodeRequest& req) {
    auto body = decode_request_to_json(req).dump();
    auto res = impl_->client.Post("/v1/decode", body, "application/json");
    if (!res) {
        throw TransientBackendError("decode: connection failed (" +
                                    httplib::to_string(res.error()) + ")");
    }
    if (res->status >= 500) {
        throw TransientBackendError("decode: server error " + std::to_string(res->status));
    }
    if (res->status != 200) {
        throw BackendError("decode: HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
        return decode_response_from_json(nlohmann::json::parse(res->body));
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("decode: malformed response: ") + e.what());
    }
}

std::string decode_request_id(const InterpolatedEmbedding& interp) {
    return "region=" + interp.region_id + ";seeds=" + interp.seed_ids[0] + "," +
           interp.seed_ids[1];
}

std::string decode_interpolation(DecodeClient& client, const InterpolatedEmbedding& interp,
                                 const DecodeConfig& config) {
    DecodeRequest req;
    req.request_id = decode_request_id(interp);
    req.prompt = build_decode_prompt(config.few_shot);
    req.n_dim = interp.n_dim;
    req.m_tokens = interp.m_tokens;
    req.matrix = interp.matrix;
    req.max_tokens = config.max_tokens;
    req.temperature = config.temperature;

    const int attempts = std::max(config.retry.max_attempts, 1);
    int backoff = config.retry.initial_backoff_ms;
    for (int attempt = 1;; ++attempt) {
        try {
            DecodeResponse resp = client.decode(req);
            std::string text = trim(resp.text);
            if (starts_with(text, "Output:")) {
                text = trim(text.substr(7));
            }
            if (text.empty()) {
                throw BackendError("empty decode for region " + interp.region_id);
            }
            return text;
        } catch (const TransientBackendError& e) {
            if (attempt >= attempts) {
                throw BackendError("decode failed for region " + interp.region_id + " after " +
                                   std::to_string(attempt) + " attempts: " + e.what());
            }
            if (backoff > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
                backoff *= 2;
            }
        }
    }
}

}  // namespace sparsegen
