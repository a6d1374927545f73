#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sparsegen {

// One labeled pair from the seed pool.
struct Example {
    std::string id;
    std::string input;
    std::string output;
};

enum class GenerationMethod { embed_sdg, random_baseline };

const char* to_string(GenerationMethod m);
GenerationMethod generation_method_from_string(const std::string& s);

struct Provenance {
    std::string region_id;  // empty for baseline records
    std::vector<std::string> seed_ids;
    GenerationMethod method = GenerationMethod::embed_sdg;
    std::optional<std::string> decoded_text;
};

// A parsed teacher completion with full provenance.
struct SyntheticExample {
    std::string id;
    std::string question;
    std::string answer;
    std::string final_answer;
    Provenance provenance;
};

// Throws ConfigError describing the first violated invariant, if any.
void check_synthetic(const SyntheticExample& ex);

// JSONL, one object per line, UTF-8, LF. Lines are numbered from 1 in error
// messages. Records without an "id" get "row-<line>".
std::vector<Example> load_dataset(const std::string& path);

// Deterministic writer: stable field order, byte-identical for equal input.
// Returns the record count.
size_t save_dataset(const std::vector<SyntheticExample>& examples, const std::string& path);

std::vector<SyntheticExample> load_synthetic(const std::string& path);

// Seed-pool writer, used by tools and tests to materialize datasets.
size_t save_examples(const std::vector<Example>& examples, const std::string& path);

}  // namespace sparsegen
