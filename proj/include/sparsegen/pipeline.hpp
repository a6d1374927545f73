#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sparsegen/analysis.hpp"
#include "sparsegen/artifacts.hpp"
#include "sparsegen/dataset.hpp"
#include "sparsegen/decode.hpp"
#include "sparsegen/generation.hpp"
#include "sparsegen/providers.hpp"
#include "sparsegen/sparsity.hpp"
#include "sparsegen/tsne.hpp"

namespace sparsegen {

struct RunConfig {
    std::string dataset_path;
    std::string out_dir = "out";

    std::string embedding_source = "mock";  // mock | file
    std::string embedding_file;
    uint32_t mock_n_dim = 64;

    std::string reducer = "pca";  // pca | tsne
    uint32_t k = 2;
    double tsne_perplexity = 30.0;
    uint32_t tsne_iterations = 500;

    std::vector<double> cell_size;  // empty = box extent / 32 per dimension
    std::vector<double> stride;     // empty = cell_size
    uint64_t threshold = 0;         // 0 = percentile policy
    double percentile = 5.0;
    uint64_t min_count = 3;         // accuracy aggregation filter

    uint64_t target = 1;
    uint64_t rng_seed = 0;

    std::string decode_endpoint = "mock";  // mock | http(s)://host:port
    uint32_t decode_max_tokens = 256;
    double decode_temperature = 0.0;
    std::vector<std::string> few_shot_ids;  // empty = first 4 dataset examples

    std::string teacher_endpoint = "mock";  // mock | full chat-completions URL
    std::string teacher_model = "teacher";
    double teacher_temperature = 0.7;
    uint32_t teacher_max_tokens = 512;

    int max_attempts = 3;
    int backoff_ms = 100;
    int parallelism = 4;
};

void validate_config(const RunConfig& config);  // throws ConfigError

// Flat "key = value" file; '#' starts a comment line. Unknown keys error.
RunConfig load_config_file(const std::string& path);
void apply_config_value(RunConfig& config, const std::string& key, const std::string& value);
nlohmann::ordered_json config_to_json(const RunConfig& config);

struct StageCounts {
    uint64_t points = 0;
    uint64_t cells = 0;
    uint64_t sparse_regions = 0;
    uint64_t seed_pairs = 0;
    uint64_t decodes = 0;
    uint64_t generations = 0;
    uint64_t accepted = 0;
    uint64_t quarantined = 0;
};

struct ConsumedRegion {
    std::string region_id;
    uint64_t count = 0;
};

struct SkippedRegion {
    std::string region_id;
    std::string reason;
};

struct RunManifest {
    nlohmann::ordered_json config;
    std::string kernel_backend;
    StageCounts counts;
    uint64_t threshold = 0;
    std::string threshold_warning;
    std::vector<ConsumedRegion> consumed_regions;
    std::vector<SkippedRegion> skipped_regions;
    std::map<std::string, std::string> output_hashes;  // file name -> fnv1a64:<hex>
    std::string stop_reason;
    std::string failed_stage;  // set when a stage aborted the run
    std::string error;
    std::map<std::string, double> stage_ms;  // written to timings.json, not the manifest
};

nlohmann::ordered_json manifest_to_json(const RunManifest& manifest);

// Full generation pass: embed, pool, reduce, grid scan, threshold, detect,
// then per sparse region (sparsest first) seed selection, interpolation,
// decode and teacher generation until `target` examples are accepted or the
// regions run out. Writes the generated set, stage artifacts, reports,
// manifest.json and timings.json under out_dir.
RunManifest run_pipeline(const RunConfig& config);

// Random-seed comparison run: samples `target` seeds uniformly and prompts
// the teacher once per seed (1:1), with the same parsing, validation and
// persistence as the main pass.
RunManifest run_baseline(const RunConfig& config);

// Individual stages, exposed as CLI subcommands. Each reads its inputs from
// out_dir (or the dataset) and writes its artifact back to out_dir.
void stage_embed(const RunConfig& config);
void stage_reduce(const RunConfig& config);
void stage_scan(const RunConfig& config);
void stage_detect(const RunConfig& config);
void stage_seed(const RunConfig& config);
void stage_interpolate(const RunConfig& config);
void stage_decode(const RunConfig& config);
void stage_generate(const RunConfig& config);
void stage_analyze(const RunConfig& config, const std::string& predictions_path);

// Shared assembly helpers.
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const RunConfig& config);
GridSpec resolve_grid_spec(const RunConfig& config, const BoundingBox& box);
std::vector<Example> few_shot_examples(const RunConfig& config,
                                       const std::vector<Example>& dataset);

struct ReductionResult {
    std::vector<PooledVector> pooled;
    std::vector<ReducedPoint> points;
    std::optional<Projector> projector;  // PCA only
};
ReductionResult reduce_embeddings(const RunConfig& config,
                                  const std::vector<TokenizedEmbedding>& embeddings);

struct DetectionResult {
    GridScan scan;
    DensityHistogram histogram;
    ThresholdResult threshold;
    std::vector<SparseRegion> regions;  // sparsest first, ties by region id
};
DetectionResult detect_from_points(const RunConfig& config,
                                   const std::vector<ReducedPoint>& points);

}  // namespace sparsegen
