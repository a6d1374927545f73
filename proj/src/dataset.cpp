#include "sparsegen/dataset.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "sparsegen/util.hpp"

namespace sparsegen {

using ordered_json = nlohmann::ordered_json;

const char* to_string(GenerationMethod m) {
    return m == GenerationMethod::embed_sdg ? "embed_sdg" : "random_baseline";
}

GenerationMethod generation_method_from_string(const std::string& s) {
    if (s == "embed_sdg") return GenerationMethod::embed_sdg;
    if (s == "random_baseline") return GenerationMethod::random_baseline;
    throw ConfigError("unknown generation method: " + s);
}

void check_synthetic(const SyntheticExample& ex) {
    if (ex.id.empty()) throw ConfigError("synthetic example: empty id");
    if (ex.question.empty()) throw ConfigError("synthetic example " + ex.id + ": empty question");
    if (ex.answer.empty()) throw ConfigError("synthetic example " + ex.id + ": empty answer");
    if (ex.final_answer.empty()) {
        throw ConfigError("synthetic example " + ex.id + ": empty final_answer");
    }
    size_t want_seeds = ex.provenance.method == GenerationMethod::embed_sdg ? 2 : 1;
    if (ex.provenance.seed_ids.size() != want_seeds) {
        throw ConfigError("synthetic example " + ex.id + ": expected " +
                          std::to_string(want_seeds) + " seed ids, got " +
                          std::to_string(ex.provenance.seed_ids.size()));
    }
}

std::vector<Example> load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset: " + path);

    std::vector<Example> out;
    std::unordered_set<std::string> seen;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;

        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const std::exception& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": malformed JSON: " + e.what());
        }
        if (!j.is_object()) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected a JSON object");
        }
        Example ex;
        if (j.contains("id")) {
            if (!j["id"].is_string()) {
                throw ConfigError("line " + std::to_string(lineno) + ": id must be a string");
            }
            ex.id = j["id"].get<std::string>();
        } else {
            ex.id = "row-" + std::to_string(lineno);
        }
        for (const char* field : {"input", "output"}) {
            if (!j.contains(field)) {
                throw ConfigError("line " + std::to_string(lineno) + ": missing field " + field);
            }
            if (!j[field].is_string()) {
                throw ConfigError("line " + std::to_string(lineno) + ": field " + field +
                                  " must be a string");
            }
        }
        ex.input = j["input"].get<std::string>();
        ex.output = j["output"].get<std::string>();
        if (ex.input.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": empty input");
        }
        if (!seen.insert(ex.id).second) {
            throw ConfigError("duplicate id: " + ex.id);
        }
        out.push_back(std::move(ex));
    }
    if (in.bad()) throw IoError("read failed: " + path);
    return out;
}

static ordered_json synthetic_to_json(const SyntheticExample& ex) {
    ordered_json prov;
    prov["region_id"] = ex.provenance.region_id;
    prov["seed_ids"] = ex.provenance.seed_ids;
    prov["method"] = to_string(ex.provenance.method);
    if (ex.provenance.decoded_text) prov["decoded_text"] = *ex.provenance.decoded_text;

    ordered_json j;
    j["id"] = ex.id;
    j["question"] = ex.question;
    j["answer"] = ex.answer;
    j["final_answer"] = ex.final_answer;
    j["provenance"] = std::move(prov);
    return j;
}

size_t save_dataset(const std::vector<SyntheticExample>& examples, const std::string& path) {
    for (const auto& ex : examples) check_synthetic(ex);
    std::string buf;
    for (const auto& ex : examples) {
        buf += synthetic_to_json(ex).dump();
        buf += '\n';
    }
    write_file(path, buf);
    return examples.size();
}

std::vector<SyntheticExample> load_synthetic(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset: " + path);

    std::vector<SyntheticExample> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const std::exception& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": malformed JSON: " + e.what());
        }
        SyntheticExample ex;
        try {
            ex.id = j.at("id").get<std::string>();
            ex.question = j.at("question").get<std::string>();
            ex.answer = j.at("answer").get<std::string>();
            ex.final_answer = j.at("final_answer").get<std::string>();
            const auto& prov = j.at("provenance");
            ex.provenance.region_id = prov.at("region_id").get<std::string>();
            ex.provenance.seed_ids = prov.at("seed_ids").get<std::vector<std::string>>();
            ex.provenance.method =
                generation_method_from_string(prov.at("method").get<std::string>());
            if (prov.contains("decoded_text")) {
                ex.provenance.decoded_text = prov.at("decoded_text").get<std::string>();
            }
        } catch (const ordered_json::exception& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
        out.push_back(std::move(ex));
    }
    if (in.bad()) throw IoError("read failed: " + path);
    return out;
}

size_t save_examples(const std::vector<Example>& examples, const std::string& path) {
    std::string buf;
    for (const auto& ex : examples) {
        ordered_json j;
        j["id"] = ex.id;
        j["input"] = ex.input;
        j["output"] = ex.output;
        buf += j.dump();
        buf += '\n';
    }
    write_file(path, buf);
    return examples.size();
}

}  // namespace sparsegen
