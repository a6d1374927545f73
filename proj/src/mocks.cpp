#include "sparsegen/mocks.hpp"

#include <cmath>
#include <unordered_map>

#include "sparsegen/kernels.hpp"
#include "sparsegen/util.hpp"

namespace sparsegen {

TokenizedEmbedding mock_embed(const std::string& text, const MockSpec& spec,
                              const std::string& example_id) {
    if (spec.n_dim < 2) throw ConfigError("mock embed: n_dim must be >= 2");
    std::vector<std::string> tokens = split_whitespace(text);
    if (tokens.empty()) throw ConfigError("mock embed: empty text");

    TokenizedEmbedding te;
    te.example_id = example_id;
    te.n_dim = spec.n_dim;
    te.m_tokens = static_cast<uint32_t>(tokens.size());
    te.matrix.resize(size_t(te.n_dim) * te.m_tokens);
    te.weights.assign(te.m_tokens, 1.0f / float(te.m_tokens));

    std::vector<double> col(spec.n_dim);
    for (uint32_t j = 0; j < te.m_tokens; ++j) {
        Rng rng(fnv1a64(tokens[j]) ^ (spec.seed * 0x9e3779b97f4a7c15ull));
        for (uint32_t i = 0; i < spec.n_dim; ++i) col[i] = rng.gaussian();
        double norm = std::sqrt(kernels::dot(col.data(), col.data(), spec.n_dim));
        if (norm == 0.0) norm = 1.0;
        for (uint32_t i = 0; i < spec.n_dim; ++i) {
            te.matrix[size_t(j) * te.n_dim + i] = static_cast<float>(col[i] / norm);
        }
    }
    return te;
}

SeedTextResolver make_seed_text_resolver(const std::vector<Example>& dataset) {
    auto by_id = std::make_shared<std::unordered_map<std::string, std::string>>();
    for (const auto& ex : dataset) (*by_id)[ex.id] = ex.input;
    return [by_id](const std::string& a, const std::string& b)
               -> std::optional<std::pair<std::string, std::string>> {
        auto ia = by_id->find(a);
        auto ib = by_id->find(b);
        if (ia == by_id->end() || ib == by_id->end()) return std::nullopt;
        return std::make_pair(ia->second, ib->second);
    };
}

namespace {

std::string join_words(const std::vector<std::string>& words, size_t from, size_t to) {
    std::string out;
    for (size_t i = from; i < to; ++i) {
        if (!out.empty()) out += ' ';
        out += words[i];
    }
    return out;
}

// "region=<rid>;seeds=<a>,<b>"
std::optional<std::pair<std::string, std::string>> seeds_from_request_id(const std::string& id) {
    size_t seeds = id.find("seeds=");
    if (seeds == std::string::npos) return std::nullopt;
    std::string rest = id.substr(seeds + 6);
    size_t comma = rest.find(',');
    if (comma == std::string::npos) return std::nullopt;
    return std::make_pair(rest.substr(0, comma), rest.substr(comma + 1));
}

}  // namespace

DecodeResponse mock_decode(const DecodeRequest& req, const SeedTextResolver& resolver) {
    if (req.n_dim == 0 || req.m_tokens == 0) {
        throw BackendError("protocol error: zero n_dim or m_tokens");
    }
    if (req.matrix.size() != size_t(req.n_dim) * req.m_tokens) {
        throw BackendError("protocol error: matrix size " + std::to_string(req.matrix.size()) +
                           " does not match n_dim*m_tokens");
    }

    const std::string tag =
        hex64(fnv1a64(req.matrix.data(), req.matrix.size() * sizeof(float)));

    std::string fusion;
    auto seed_ids = seeds_from_request_id(req.request_id);
    if (seed_ids && resolver) {
        if (auto texts = resolver(seed_ids->first, seed_ids->second)) {
            std::vector<std::string> w1 = split_whitespace(texts->first);
            std::vector<std::string> w2 = split_whitespace(texts->second);
            fusion = join_words(w1, 0, (w1.size() + 1) / 2);
            std::string back = join_words(w2, w2.size() / 2, w2.size());
            if (!back.empty()) fusion += fusion.empty() ? back : " " + back;
        }
    }
    if (fusion.empty()) fusion = "an interpolated passage";

    DecodeResponse resp;
    resp.text = "Output: " + fusion + " [" + tag + "]";
    resp.prompt_tokens = static_cast<uint32_t>(split_whitespace(req.prompt).size());
    resp.generated_tokens = static_cast<uint32_t>(split_whitespace(resp.text).size());
    return resp;
}

namespace {

std::string gist(const std::string& text, size_t max_words) {
    std::vector<std::string> words;
    for (auto& w : split_whitespace(text)) {
        std::string clean;
        for (char c : w) {
            if (c != '#') clean += c;
        }
        if (!clean.empty()) words.push_back(clean);
        if (words.size() >= max_words) break;
    }
    return join_words(words, 0, words.size());
}

std::string section(const std::string& text, const std::string& from, const std::string& to,
                    size_t search_from = 0) {
    size_t a = text.find(from, search_from);
    if (a == std::string::npos) {
        throw BackendError("mock teacher: prompt is missing \"" + from + "\"");
    }
    a += from.size();
    size_t b = text.find(to, a);
    if (b == std::string::npos) {
        throw BackendError("mock teacher: prompt is missing \"" + to + "\"");
    }
    return trim(text.substr(a, b - a));
}

}  // namespace

std::string mock_teacher(const std::string& prompt) {
    const uint64_t value = 100 + fnv1a64(prompt) % 900;
    std::string question, answer;

    if (prompt.find("Partial Example:") != std::string::npos &&
        prompt.find("Example 1:") != std::string::npos) {
        size_t ex1 = prompt.find("Example 1:");
        std::string q1 = section(prompt, "### Question", "### Answer", ex1);
        std::string a1 = section(prompt, "### Answer", "Example 2:", ex1);
        size_t ex2 = prompt.find("Example 2:");
        std::string q2 = section(prompt, "### Question", "### Answer", ex2);
        std::string partial = section(prompt, "Partial Example:", "Your Task:");
        if (q1.empty() || a1.empty() || q2.empty()) {
            throw BackendError("mock teacher: empty seed sections");
        }
        question = "Consider a setting that blends two problems. First: " + gist(q1, 8) +
                   ". Second: " + gist(q2, 8) + ". Following the sketch \"" + gist(partial, 6) +
                   "\", how many units are there in total?";
        answer = "Take the quantity from the first setting, combine it with the rate from the "
                 "second, and simplify step by step. The combined total works out to " +
                 std::to_string(value) + ".";
    } else if (prompt.find("Seed Example to base the new sample on:") != std::string::npos) {
        size_t ex = prompt.find("Example:");
        if (ex == std::string::npos) throw BackendError("mock teacher: missing Example section");
        std::string q1 = section(prompt, "### Question", "### Answer", ex);
        if (q1.empty()) throw BackendError("mock teacher: empty seed sections");
        question = "Here is a fresh variant of a familiar setup: " + gist(q1, 10) +
                   ". With new quantities in play, what is the result?";
        answer = "Set up the same relationship with the new quantities and solve step by step; "
                 "the result is " +
                 std::to_string(value) + ".";
    } else {
        throw BackendError("mock teacher: unrecognized prompt scaffold");
    }

    return "### Question\n" + question + "\n\n### Answer\n" + answer + "\n\n### " +
           std::to_string(value) + "\n";
}

}  // namespace sparsegen
