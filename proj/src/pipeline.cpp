#include "sparsegen/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <numeric>
#include <unordered_map>

#include "sparsegen/emb_io.hpp"
#include "sparsegen/interpolation.hpp"
#include "sparsegen/kernels.hpp"
#include "sparsegen/seeding.hpp"
#include "sparsegen/util.hpp"

namespace fs = std::filesystem;

namespace sparsegen {

namespace {

std::vector<double> parse_double_list(const std::string& value, const std::string& key) {
    std::vector<double> out;
    size_t start = 0;
    while (start <= value.size()) {
        size_t comma = value.find(',', start);
        std::string part = trim(value.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!part.empty()) {
            try {
                size_t used = 0;
                out.push_back(std::stod(part, &used));
                if (used != part.size()) throw std::invalid_argument(part);
            } catch (const std::exception&) {
                throw ConfigError("config: bad number in " + key + ": \"" + part + "\"");
            }
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::string> parse_string_list(const std::string& value) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= value.size()) {
        size_t comma = value.find(',', start);
        std::string part = trim(value.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!part.empty()) out.push_back(part);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

uint64_t parse_u64(const std::string& value, const std::string& key) {
    try {
        size_t used = 0;
        unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer for " + key + ": \"" + value + "\"");
    }
}

double parse_f64(const std::string& value, const std::string& key) {
    try {
        size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for " + key + ": \"" + value + "\"");
    }
}

}  // namespace

void apply_config_value(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "dataset") c.dataset_path = value;
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "embedding_source") c.embedding_source = value;
    else if (key == "embedding_file") c.embedding_file = value;
    else if (key == "mock_n_dim") c.mock_n_dim = uint32_t(parse_u64(value, key));
    else if (key == "reducer") c.reducer = value;
    else if (key == "k") c.k = uint32_t(parse_u64(value, key));
    else if (key == "tsne_perplexity") c.tsne_perplexity = parse_f64(value, key);
    else if (key == "tsne_iterations") c.tsne_iterations = uint32_t(parse_u64(value, key));
    else if (key == "cell_size") c.cell_size = parse_double_list(value, key);
    else if (key == "stride") c.stride = parse_double_list(value, key);
    else if (key == "threshold") c.threshold = parse_u64(value, key);
    else if (key == "percentile") c.percentile = parse_f64(value, key);
    else if (key == "min_count") c.min_count = parse_u64(value, key);
    else if (key == "target") c.target = parse_u64(value, key);
    else if (key == "seed") c.rng_seed = parse_u64(value, key);
    else if (key == "decode_endpoint") c.decode_endpoint = value;
    else if (key == "decode_max_tokens") c.decode_max_tokens = uint32_t(parse_u64(value, key));
    else if (key == "decode_temperature") c.decode_temperature = parse_f64(value, key);
    else if (key == "few_shot_ids") c.few_shot_ids = parse_string_list(value);
    else if (key == "teacher_endpoint") c.teacher_endpoint = value;
    else if (key == "teacher_model") c.teacher_model = value;
    else if (key == "teacher_temperature") c.teacher_temperature = parse_f64(value, key);
    else if (key == "teacher_max_tokens") c.teacher_max_tokens = uint32_t(parse_u64(value, key));
    else if (key == "max_attempts") c.max_attempts = int(parse_u64(value, key));
    else if (key == "backoff_ms") c.backoff_ms = int(parse_u64(value, key));
    else if (key == "parallelism") c.parallelism = int(parse_u64(value, key));
    else throw ConfigError("config: unknown key \"" + key + "\"");
}

RunConfig load_config_file(const std::string& path) {
    RunConfig c;
    std::string text = read_file(path);
    size_t lineno = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string line =
            text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
        ++lineno;
        std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + " line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        apply_config_value(c, key, value);
    }
    return c;
}

void validate_config(const RunConfig& c) {
    if (c.dataset_path.empty()) throw ConfigError("config: dataset path is required");
    if (c.out_dir.empty()) throw ConfigError("config: out_dir is required");
    if (c.embedding_source != "mock" && c.embedding_source != "file") {
        throw ConfigError("config: embedding_source must be mock or file");
    }
    if (c.embedding_source == "file" && c.embedding_file.empty()) {
        throw ConfigError("config: embedding_file is required for the file source");
    }
    if (c.mock_n_dim < 2) throw ConfigError("config: mock_n_dim must be >= 2");
    if (c.reducer != "pca" && c.reducer != "tsne") {
        throw ConfigError("config: reducer must be pca or tsne");
    }
    if (c.k != 2 && c.k != 3) throw ConfigError("config: k must be 2 or 3");
    if (c.target < 1) throw ConfigError("config: target must be >= 1");
    if (!(c.percentile > 0.0 && c.percentile <= 100.0)) {
        throw ConfigError("config: percentile must be in (0, 100]");
    }
    if (!c.cell_size.empty() && c.cell_size.size() != 1 && c.cell_size.size() != c.k) {
        throw ConfigError("config: cell_size needs 1 or k values");
    }
    if (!c.stride.empty() && c.stride.size() != 1 && c.stride.size() != c.k) {
        throw ConfigError("config: stride needs 1 or k values");
    }
    for (double v : c.cell_size) {
        if (!(v > 0.0)) throw ConfigError("config: cell_size values must be > 0");
    }
    for (double v : c.stride) {
        if (!(v > 0.0)) throw ConfigError("config: stride values must be > 0");
    }
    if (c.max_attempts < 1) throw ConfigError("config: max_attempts must be >= 1");
    if (c.parallelism < 1) throw ConfigError("config: parallelism must be >= 1");
    auto endpoint_ok = [](const std::string& e) {
        return e == "mock" || starts_with(e, "http://") || starts_with(e, "https://");
    };
    if (!endpoint_ok(c.decode_endpoint)) {
        throw ConfigError("config: decode_endpoint must be mock or an http(s) URL");
    }
    if (!endpoint_ok(c.teacher_endpoint)) {
        throw ConfigError("config: teacher_endpoint must be mock or an http(s) URL");
    }
}

nlohmann::ordered_json config_to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["dataset"] = c.dataset_path;
    j["out_dir"] = c.out_dir;
    j["embedding_source"] = c.embedding_source;
    j["embedding_file"] = c.embedding_file;
    j["mock_n_dim"] = c.mock_n_dim;
    j["reducer"] = c.reducer;
    j["k"] = c.k;
    j["tsne_perplexity"] = c.tsne_perplexity;
    j["tsne_iterations"] = c.tsne_iterations;
    j["cell_size"] = c.cell_size;
    j["stride"] = c.stride;
    j["threshold"] = c.threshold;
    j["percentile"] = c.percentile;
    j["min_count"] = c.min_count;
    j["target"] = c.target;
    j["seed"] = c.rng_seed;
    j["decode_endpoint"] = c.decode_endpoint;
    j["decode_max_tokens"] = c.decode_max_tokens;
    j["decode_temperature"] = c.decode_temperature;
    j["few_shot_ids"] = c.few_shot_ids;
    j["teacher_endpoint"] = c.teacher_endpoint;
    j["teacher_model"] = c.teacher_model;
    j["teacher_temperature"] = c.teacher_temperature;
    j["teacher_max_tokens"] = c.teacher_max_tokens;
    j["max_attempts"] = c.max_attempts;
    j["backoff_ms"] = c.backoff_ms;
    j["parallelism"] = c.parallelism;
    return j;
}

nlohmann::ordered_json manifest_to_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["config"] = m.config;
    j["kernel_backend"] = m.kernel_backend;
    nlohmann::ordered_json counts;
    counts["points"] = m.counts.points;
    counts["cells"] = m.counts.cells;
    counts["sparse_regions"] = m.counts.sparse_regions;
    counts["seed_pairs"] = m.counts.seed_pairs;
    counts["decodes"] = m.counts.decodes;
    counts["generations"] = m.counts.generations;
    counts["accepted"] = m.counts.accepted;
    counts["quarantined"] = m.counts.quarantined;
    j["counts"] = std::move(counts);
    j["threshold"] = m.threshold;
    if (!m.threshold_warning.empty()) j["threshold_warning"] = m.threshold_warning;
    j["stop_reason"] = m.stop_reason;
    if (!m.failed_stage.empty()) {
        j["failed_stage"] = m.failed_stage;
        j["error"] = m.error;
    }
    auto consumed = nlohmann::ordered_json::array();
    for (const auto& r : m.consumed_regions) {
        consumed.push_back({{"region_id", r.region_id}, {"count", r.count}});
    }
    j["consumed_regions"] = std::move(consumed);
    auto skipped = nlohmann::ordered_json::array();
    for (const auto& r : m.skipped_regions) {
        skipped.push_back({{"region_id", r.region_id}, {"reason", r.reason}});
    }
    j["skipped_regions"] = std::move(skipped);
    nlohmann::ordered_json outputs;
    for (const auto& [name, hash] : m.output_hashes) outputs[name] = hash;
    j["outputs"] = std::move(outputs);
    return j;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const RunConfig& c) {
    if (c.embedding_source == "file") {
        return std::make_unique<FileEmbeddingProvider>(c.embedding_file);
    }
    MockSpec spec;
    spec.n_dim = c.mock_n_dim;
    spec.seed = c.rng_seed;
    return std::make_unique<MockEmbeddingProvider>(spec);
}

GridSpec resolve_grid_spec(const RunConfig& c, const BoundingBox& box) {
    GridSpec spec;
    if (c.cell_size.empty()) {
        spec.cell_size = default_cell_size(box);
    } else if (c.cell_size.size() == 1) {
        spec.cell_size.assign(box.dims(), c.cell_size[0]);
    } else {
        spec.cell_size = c.cell_size;
    }
    if (c.stride.empty()) {
        spec.stride = spec.cell_size;
    } else if (c.stride.size() == 1) {
        spec.stride.assign(box.dims(), c.stride[0]);
    } else {
        spec.stride = c.stride;
    }
    spec.threshold = std::max<uint64_t>(c.threshold, 1);
    return spec;
}

std::vector<Example> few_shot_examples(const RunConfig& c, const std::vector<Example>& dataset) {
    std::vector<Example> out;
    if (!c.few_shot_ids.empty()) {
        if (c.few_shot_ids.size() != 4) {
            throw ConfigError("config: few_shot_ids needs exactly 4 ids");
        }
        std::unordered_map<std::string, const Example*> by_id;
        for (const auto& ex : dataset) by_id.emplace(ex.id, &ex);
        for (const auto& id : c.few_shot_ids) {
            auto it = by_id.find(id);
            if (it == by_id.end()) throw ConfigError("config: few_shot id not in dataset: " + id);
            out.push_back(*it->second);
        }
        return out;
    }
    if (dataset.size() < 4) {
        throw ConfigError("dataset too small: the decode prompt needs 4 few-shot examples");
    }
    out.assign(dataset.begin(), dataset.begin() + 4);
    return out;
}

ReductionResult reduce_embeddings(const RunConfig& c,
                                  const std::vector<TokenizedEmbedding>& embeddings) {
    ReductionResult out;
    out.pooled.reserve(embeddings.size());
    for (const auto& te : embeddings) out.pooled.push_back(pool(te));
    if (c.reducer == "pca") {
        out.projector = fit_pca(out.pooled, c.k);
        out.points.reserve(out.pooled.size());
        for (const auto& v : out.pooled) out.points.push_back(project(*out.projector, v));
    } else {
        TsneParams params;
        params.k = c.k;
        params.perplexity = c.tsne_perplexity;
        params.iterations = c.tsne_iterations;
        params.seed = c.rng_seed;
        out.points = fit_tsne(out.pooled, params).points;
    }
    return out;
}

DetectionResult detect_from_points(const RunConfig& c, const std::vector<ReducedPoint>& points) {
    DetectionResult out;
    BoundingBox box = bounding_box(points);
    GridSpec spec = resolve_grid_spec(c, box);
    out.scan = scan_grid(points, spec, box);
    out.histogram = density_histogram(out.scan);

    ThresholdPolicy policy;
    policy.percentile = c.percentile;
    if (c.threshold > 0) policy.override_threshold = c.threshold;
    out.threshold = select_threshold(out.histogram, policy);

    out.regions = detect_sparse_regions(out.scan, out.threshold.threshold);
    std::sort(out.regions.begin(), out.regions.end(), [](const auto& a, const auto& b) {
        return a.count != b.count ? a.count < b.count : a.region_id < b.region_id;
    });
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string file_hash(const std::string& path) {
    std::string bytes = read_file(path);
    return "fnv1a64:" + hex64(fnv1a64(bytes.data(), bytes.size()));
}

std::string out_path(const RunConfig& c, const std::string& name) {
    return (fs::path(c.out_dir) / name).string();
}

void hash_outputs(const RunConfig& c, RunManifest& m, const std::vector<std::string>& names) {
    for (const auto& name : names) {
        m.output_hashes[name] = file_hash(out_path(c, name));
    }
}

void write_manifest_files(const RunConfig& c, const RunManifest& m) {
    write_file(out_path(c, "manifest.json"), manifest_to_json(m).dump(2) + "\n");
    nlohmann::ordered_json t;
    for (const auto& [stage, ms] : m.stage_ms) t[stage + "_ms"] = ms;
    write_file(out_path(c, "timings.json"), t.dump(2) + "\n");
}

std::unique_ptr<DecodeClient> new_decode_client(const RunConfig& c,
                                                const SeedTextResolver& resolver) {
    if (c.decode_endpoint == "mock") return std::make_unique<MockDecodeClient>(resolver);
    return std::make_unique<HttpDecodeClient>(c.decode_endpoint);
}

std::unique_ptr<TeacherClient> new_teacher_client(const RunConfig& c) {
    if (c.teacher_endpoint == "mock") return std::make_unique<MockTeacherClient>();
    TeacherConfig tc;
    tc.endpoint = c.teacher_endpoint;
    tc.model = c.teacher_model;
    tc.temperature = c.teacher_temperature;
    tc.max_tokens = c.teacher_max_tokens;
    tc.retry = RetryPolicy{c.max_attempts, c.backoff_ms};
    return std::make_unique<HttpTeacherClient>(tc);
}

struct WorkItem {
    const SparseRegion* region = nullptr;
    SeedPair pair;
    const Example* seed1 = nullptr;
    const Example* seed2 = nullptr;
    InterpolatedEmbedding interp;
};

struct ItemOutcome {
    bool accepted = false;
    SyntheticExample example;
    QuarantineRecord quarantine;
    DecodedText decoded;
};

bool coords_in_region(const std::vector<double>& coords, const SparseRegion& region) {
    for (size_t d = 0; d < coords.size(); ++d) {
        if (coords[d] < region.origin[d] || coords[d] >= region.origin[d] + region.cell_size[d]) {
            return false;
        }
    }
    return true;
}

// Decode, prompt the teacher, parse and validate one work item. Transport
// failures propagate; grammar and validation failures quarantine.
ItemOutcome process_item(const RunConfig& c, const WorkItem& item, const DecodeConfig& dcfg,
                         const SeedTextResolver& resolver) {
    auto decode_client = new_decode_client(c, resolver);
    std::string decoded = decode_interpolation(*decode_client, item.interp, dcfg);

    Provenance prov;
    prov.region_id = item.region->region_id;
    prov.seed_ids = {item.pair.first_id, item.pair.second_id};
    prov.method = GenerationMethod::embed_sdg;
    prov.decoded_text = decoded;

    ItemOutcome outcome;
    outcome.decoded = {item.region->region_id, decoded};

    auto teacher = new_teacher_client(c);
    std::string prompt = build_generation_prompt(*item.seed1, *item.seed2, decoded);
    RawGeneration raw = generate(*teacher, prompt, RetryPolicy{c.max_attempts, c.backoff_ms});

    try {
        ParsedGeneration parsed =
            parse_synthetic(raw, prov, "gen-" + item.region->region_id);
        std::vector<std::string> findings =
            validate_example(parsed.example, {*item.seed1, *item.seed2});
        if (!findings.empty()) {
            std::string joined;
            for (const auto& f : findings) {
                if (!joined.empty()) joined += "; ";
                joined += f;
            }
            outcome.quarantine = {prov, raw.text, "validation: " + joined};
        } else {
            outcome.accepted = true;
            outcome.example = std::move(parsed.example);
        }
    } catch (const ParseError& e) {
        outcome.quarantine = {prov, e.raw_text, std::string("parse: ") + e.what()};
    }
    return outcome;
}

}  // namespace

RunManifest run_pipeline(const RunConfig& c) {
    validate_config(c);
    fs::create_directories(c.out_dir);

    RunManifest m;
    m.config = config_to_json(c);
    m.kernel_backend = kernels::active_backend();
    std::string stage = "load";

    try {
        auto t0 = Clock::now();
        std::vector<Example> dataset = load_dataset(c.dataset_path);
        if (dataset.empty()) throw ConfigError("empty seed pool");
        std::vector<Example> few_shot = few_shot_examples(c, dataset);
        m.stage_ms["load"] = ms_since(t0);

        stage = "embed";
        t0 = Clock::now();
        auto provider = make_embedding_provider(c);
        FetchOptions fopts;
        fopts.parallelism = c.parallelism;
        fopts.max_attempts = c.max_attempts;
        std::vector<TokenizedEmbedding> embeddings = fetch_embeddings(*provider, dataset, fopts);
        m.stage_ms["embed"] = ms_since(t0);

        stage = "reduce";
        t0 = Clock::now();
        ReductionResult red = reduce_embeddings(c, embeddings);
        m.counts.points = red.points.size();
        m.stage_ms["reduce"] = ms_since(t0);

        stage = "scan";
        t0 = Clock::now();
        DetectionResult det = detect_from_points(c, red.points);
        m.counts.cells = det.scan.cells.size();
        m.counts.sparse_regions = det.regions.size();
        m.threshold = det.threshold.threshold;
        m.threshold_warning = det.threshold.warning;
        m.stage_ms["scan"] = ms_since(t0);

        // Spatial artifacts.
        write_reduced_points_csv(out_path(c, "reduced_points.csv"), red.points);
        write_cells_csv(out_path(c, "cells.csv"), det.scan);
        if (red.projector) write_projector_json(out_path(c, "projector.json"), *red.projector);
        emit_reports(det.scan, det.histogram, det.regions, std::nullopt, std::nullopt, c.out_dir);

        std::unordered_map<std::string, const TokenizedEmbedding*> emb_by_id;
        for (const auto& te : embeddings) emb_by_id.emplace(te.example_id, &te);
        std::unordered_map<std::string, const Example*> ex_by_id;
        for (const auto& ex : dataset) ex_by_id.emplace(ex.id, &ex);

        SeedTextResolver resolver = make_seed_text_resolver(dataset);
        DecodeConfig dcfg;
        dcfg.max_tokens = c.decode_max_tokens;
        dcfg.temperature = c.decode_temperature;
        dcfg.retry = RetryPolicy{c.max_attempts, c.backoff_ms};
        dcfg.few_shot = few_shot;

        std::vector<SeedPair> all_pairs;
        std::vector<InterpolationPlacement> placements;
        std::vector<TokenizedEmbedding> interp_records;
        std::vector<SyntheticExample> accepted;
        std::vector<QuarantineRecord> quarantined;
        std::vector<DecodedText> decoded_texts;

        stage = "seed";
        auto make_item = [&](const SparseRegion& region) -> std::optional<WorkItem> {
            SeedSelection sel = select_seed_pair(region, red.points,
                                                 region_rng_seed(c.rng_seed, region.region_id));
            if (!sel.pair) {
                m.skipped_regions.push_back({region.region_id, sel.skip_reason});
                return std::nullopt;
            }
            WorkItem item;
            item.region = &region;
            item.pair = *sel.pair;
            auto e1 = emb_by_id.find(item.pair.first_id);
            auto e2 = emb_by_id.find(item.pair.second_id);
            auto x1 = ex_by_id.find(item.pair.first_id);
            auto x2 = ex_by_id.find(item.pair.second_id);
            if (e1 == emb_by_id.end() || e2 == emb_by_id.end() || x1 == ex_by_id.end() ||
                x2 == ex_by_id.end()) {
                throw ConfigError("seed pair references unknown example in region " +
                                  region.region_id);
            }
            item.seed1 = x1->second;
            item.seed2 = x2->second;
            item.interp = average_pair(*e1->second, *e2->second, region.region_id);
            all_pairs.push_back(item.pair);
            return item;
        };

        auto place_pca = [&](WorkItem& item) {
            item.interp.reduced = project_interpolated(*red.projector, item.interp);
        };

        // Under t-SNE the placement needs a joint refit over every
        // interpolation at once, so all pairs are materialized up front.
        std::vector<WorkItem> tsne_queue;
        if (c.reducer == "tsne") {
            stage = "interpolate";
            t0 = Clock::now();
            for (const auto& region : det.regions) {
                if (auto item = make_item(region)) tsne_queue.push_back(std::move(*item));
            }
            if (!tsne_queue.empty()) {
                std::vector<PooledVector> joint = red.pooled;
                for (const auto& item : tsne_queue) {
                    joint.push_back(pooled_interpolation(item.interp));
                }
                TsneParams params;
                params.k = c.k;
                params.perplexity = c.tsne_perplexity;
                params.iterations = c.tsne_iterations;
                params.seed = c.rng_seed;
                TsneResult refit = fit_tsne(joint, params);
                std::unordered_map<std::string, const ReducedPoint*> by_id;
                for (const auto& p : refit.points) by_id.emplace(p.id, &p);
                for (auto& item : tsne_queue) {
                    item.interp.reduced = *by_id.at("interp:" + item.region->region_id);
                }
            }
            m.stage_ms["interpolate"] = ms_since(t0);
        }

        size_t region_cursor = 0;  // PCA path
        size_t queue_cursor = 0;   // t-SNE path
        double seed_interp_ms = 0.0, decode_generate_ms = 0.0;

        stage = "generate";
        while (m.counts.accepted < c.target) {
            const size_t want = size_t(std::min<uint64_t>(
                c.target - m.counts.accepted, uint64_t(std::max(c.parallelism, 1))));
            std::vector<WorkItem> chunk;
            if (c.reducer == "tsne") {
                while (chunk.size() < want && queue_cursor < tsne_queue.size()) {
                    chunk.push_back(std::move(tsne_queue[queue_cursor++]));
                }
            } else {
                auto t1 = Clock::now();
                while (chunk.size() < want && region_cursor < det.regions.size()) {
                    if (auto item = make_item(det.regions[region_cursor++])) {
                        place_pca(*item);
                        chunk.push_back(std::move(*item));
                    }
                }
                seed_interp_ms += ms_since(t1);
            }
            if (chunk.empty()) break;

            for (const auto& item : chunk) {
                placements.push_back({item.region->region_id, item.interp.reduced.coords,
                                      coords_in_region(item.interp.reduced.coords, *item.region)});
                interp_records.push_back(to_tokenized(item.interp));
            }

            auto t2 = Clock::now();
            std::vector<ItemOutcome> outcomes(chunk.size());
            parallel_for_index(chunk.size(), c.parallelism, [&](size_t i) {
                outcomes[i] = process_item(c, chunk[i], dcfg, resolver);
            });
            decode_generate_ms += ms_since(t2);

            for (size_t i = 0; i < chunk.size(); ++i) {
                m.consumed_regions.push_back({chunk[i].region->region_id,
                                              chunk[i].region->count});
                ++m.counts.decodes;
                ++m.counts.generations;
                decoded_texts.push_back(outcomes[i].decoded);
                if (outcomes[i].accepted) {
                    ++m.counts.accepted;
                    accepted.push_back(std::move(outcomes[i].example));
                } else {
                    ++m.counts.quarantined;
                    quarantined.push_back(std::move(outcomes[i].quarantine));
                }
            }
        }
        m.counts.seed_pairs = all_pairs.size();
        m.stage_ms["seed_interpolate"] = seed_interp_ms;
        m.stage_ms["decode_generate"] = decode_generate_ms;

        if (det.regions.empty()) {
            m.stop_reason = "no sparse regions";
        } else if (m.counts.accepted >= c.target) {
            m.stop_reason = "target reached";
        } else {
            m.stop_reason = "regions exhausted";
        }

        stage = "persist";
        t0 = Clock::now();
        save_dataset(accepted, out_path(c, "generated.jsonl"));
        write_quarantine_jsonl(out_path(c, "quarantine.jsonl"), quarantined);
        write_decoded_jsonl(out_path(c, "decoded.jsonl"), decoded_texts);
        write_seed_pairs_csv(out_path(c, "seed_pairs.csv"), all_pairs);
        write_emb1(out_path(c, "interpolations.emb"), interp_records);
        write_interpolated_points_csv(out_path(c, "interpolated_points.csv"), placements);

        std::vector<std::string> outputs = {
            "generated.jsonl",   "quarantine.jsonl",     "decoded.jsonl",
            "seed_pairs.csv",    "interpolations.emb",   "interpolated_points.csv",
            "reduced_points.csv", "cells.csv",           "density_histogram.csv",
            "sparse_regions.csv"};
        if (red.projector) outputs.push_back("projector.json");
        hash_outputs(c, m, outputs);
        m.stage_ms["persist"] = ms_since(t0);

        write_manifest_files(c, m);
        return m;
    } catch (const std::exception& e) {
        m.failed_stage = stage;
        m.error = e.what();
        try {
            write_manifest_files(c, m);
        } catch (...) {
            // the original error matters more
        }
        throw;
    }
}

RunManifest run_baseline(const RunConfig& c) {
    validate_config(c);
    fs::create_directories(c.out_dir);

    RunManifest m;
    m.config = config_to_json(c);
    m.kernel_backend = kernels::active_backend();
    std::string stage = "load";

    try {
        auto t0 = Clock::now();
        std::vector<Example> dataset = load_dataset(c.dataset_path);
        if (dataset.empty()) throw ConfigError("empty seed pool");
        m.stage_ms["load"] = ms_since(t0);

        stage = "sample";
        Rng rng(c.rng_seed);
        std::vector<size_t> chosen;
        chosen.reserve(c.target);
        if (c.target <= dataset.size()) {
            std::vector<size_t> idx(dataset.size());
            std::iota(idx.begin(), idx.end(), size_t(0));
            for (uint64_t i = 0; i < c.target; ++i) {
                size_t j = size_t(i) + size_t(rng.below(idx.size() - i));
                std::swap(idx[i], idx[j]);
                chosen.push_back(idx[i]);
            }
        } else {
            for (uint64_t i = 0; i < c.target; ++i) {
                chosen.push_back(size_t(rng.below(dataset.size())));
            }
        }

        stage = "generate";
        t0 = Clock::now();
        std::vector<SyntheticExample> accepted;
        std::vector<QuarantineRecord> quarantined;
        size_t cursor = 0;
        while (cursor < chosen.size()) {
            size_t batch = std::min<size_t>(size_t(std::max(c.parallelism, 1)),
                                            chosen.size() - cursor);
            std::vector<ItemOutcome> outcomes(batch);
            parallel_for_index(batch, c.parallelism, [&](size_t i) {
                const Example& seed = dataset[chosen[cursor + i]];
                Provenance prov;
                prov.seed_ids = {seed.id};
                prov.method = GenerationMethod::random_baseline;

                auto teacher = new_teacher_client(c);
                std::string prompt = build_baseline_prompt(seed);
                RawGeneration raw =
                    generate(*teacher, prompt, RetryPolicy{c.max_attempts, c.backoff_ms});

                char id[32];
                std::snprintf(id, sizeof(id), "base-%06zu", cursor + i);
                ItemOutcome& outcome = outcomes[i];
                try {
                    ParsedGeneration parsed = parse_synthetic(raw, prov, id);
                    auto findings = validate_example(parsed.example, {seed});
                    if (!findings.empty()) {
                        std::string joined;
                        for (const auto& f : findings) {
                            if (!joined.empty()) joined += "; ";
                            joined += f;
                        }
                        outcome.quarantine = {prov, raw.text, "validation: " + joined};
                    } else {
                        outcome.accepted = true;
                        outcome.example = std::move(parsed.example);
                    }
                } catch (const ParseError& e) {
                    outcome.quarantine = {prov, e.raw_text, std::string("parse: ") + e.what()};
                }
            });
            for (auto& outcome : outcomes) {
                ++m.counts.generations;
                if (outcome.accepted) {
                    ++m.counts.accepted;
                    accepted.push_back(std::move(outcome.example));
                } else {
                    ++m.counts.quarantined;
                    quarantined.push_back(std::move(outcome.quarantine));
                }
            }
            cursor += batch;
        }
        m.stage_ms["generate"] = ms_since(t0);
        m.stop_reason = "completed";

        stage = "persist";
        save_dataset(accepted, out_path(c, "generated.jsonl"));
        write_quarantine_jsonl(out_path(c, "quarantine.jsonl"), quarantined);
        hash_outputs(c, m, {"generated.jsonl", "quarantine.jsonl"});
        write_manifest_files(c, m);
        return m;
    } catch (const std::exception& e) {
        m.failed_stage = stage;
        m.error = e.what();
        try {
            write_manifest_files(c, m);
        } catch (...) {
        }
        throw;
    }
}

void stage_embed(const RunConfig& c) {
    validate_config(c);
    fs::create_directories(c.out_dir);
    std::vector<Example> dataset = load_dataset(c.dataset_path);
    auto provider = make_embedding_provider(c);
    FetchOptions fopts;
    fopts.parallelism = c.parallelism;
    fopts.max_attempts = c.max_attempts;
    write_emb1(out_path(c, "embeddings.emb"), fetch_embeddings(*provider, dataset, fopts));
}

void stage_reduce(const RunConfig& c) {
    validate_config(c);
    auto embeddings = read_emb1(out_path(c, "embeddings.emb"));
    ReductionResult red = reduce_embeddings(c, embeddings);
    write_reduced_points_csv(out_path(c, "reduced_points.csv"), red.points);
    if (red.projector) write_projector_json(out_path(c, "projector.json"), *red.projector);
}

void stage_scan(const RunConfig& c) {
    validate_config(c);
    auto points = read_reduced_points_csv(out_path(c, "reduced_points.csv"));
    BoundingBox box = bounding_box(points);
    GridScan scan = scan_grid(points, resolve_grid_spec(c, box), box);
    write_cells_csv(out_path(c, "cells.csv"), scan);
    write_file(out_path(c, "density_histogram.csv"), histogram_to_csv(density_histogram(scan)));
}

void stage_detect(const RunConfig& c) {
    validate_config(c);
    auto points = read_reduced_points_csv(out_path(c, "reduced_points.csv"));
    DetectionResult det = detect_from_points(c, points);
    write_file(out_path(c, "sparse_regions.csv"),
               regions_to_csv(det.scan.box.dims(), det.regions));
}

void stage_seed(const RunConfig& c) {
    validate_config(c);
    auto points = read_reduced_points_csv(out_path(c, "reduced_points.csv"));
    DetectionResult det = detect_from_points(c, points);
    std::vector<SeedPair> pairs;
    for (const auto& region : det.regions) {
        SeedSelection sel =
            select_seed_pair(region, points, region_rng_seed(c.rng_seed, region.region_id));
        if (sel.pair) pairs.push_back(*sel.pair);
    }
    write_seed_pairs_csv(out_path(c, "seed_pairs.csv"), pairs);
}

void stage_interpolate(const RunConfig& c) {
    validate_config(c);
    auto embeddings = read_emb1(out_path(c, "embeddings.emb"));
    auto points = read_reduced_points_csv(out_path(c, "reduced_points.csv"));
    auto pairs = read_seed_pairs_csv(out_path(c, "seed_pairs.csv"));
    DetectionResult det = detect_from_points(c, points);

    std::unordered_map<std::string, const TokenizedEmbedding*> emb_by_id;
    for (const auto& te : embeddings) emb_by_id.emplace(te.example_id, &te);
    std::unordered_map<std::string, const SparseRegion*> region_by_id;
    for (const auto& r : det.regions) region_by_id.emplace(r.region_id, &r);

    std::vector<InterpolatedEmbedding> interps;
    for (const auto& pair : pairs) {
        auto a = emb_by_id.find(pair.first_id);
        auto b = emb_by_id.find(pair.second_id);
        if (a == emb_by_id.end() || b == emb_by_id.end()) {
            throw ConfigError("interpolate: seed pair for region " + pair.region_id +
                              " references unknown embeddings");
        }
        interps.push_back(average_pair(*a->second, *b->second, pair.region_id));
    }

    if (c.reducer == "pca") {
        Projector projector = read_projector_json(out_path(c, "projector.json"));
        for (auto& interp : interps) {
            interp.reduced = project_interpolated(projector, interp);
        }
    } else if (!interps.empty()) {
        std::vector<PooledVector> joint;
        joint.reserve(embeddings.size() + interps.size());
        for (const auto& te : embeddings) joint.push_back(pool(te));
        for (const auto& interp : interps) joint.push_back(pooled_interpolation(interp));
        TsneParams params;
        params.k = c.k;
        params.perplexity = c.tsne_perplexity;
        params.iterations = c.tsne_iterations;
        params.seed = c.rng_seed;
        TsneResult refit = fit_tsne(joint, params);
        std::unordered_map<std::string, const ReducedPoint*> by_id;
        for (const auto& p : refit.points) by_id.emplace(p.id, &p);
        for (auto& interp : interps) {
            interp.reduced = *by_id.at("interp:" + interp.region_id);
        }
    }

    std::vector<TokenizedEmbedding> records;
    std::vector<InterpolationPlacement> placements;
    for (const auto& interp : interps) {
        records.push_back(to_tokenized(interp));
        auto it = region_by_id.find(interp.region_id);
        bool in_cell = it != region_by_id.end() &&
                       coords_in_region(interp.reduced.coords, *it->second);
        placements.push_back({interp.region_id, interp.reduced.coords, in_cell});
    }
    write_emb1(out_path(c, "interpolations.emb"), records);
    write_interpolated_points_csv(out_path(c, "interpolated_points.csv"), placements);
}

void stage_decode(const RunConfig& c) {
    validate_config(c);
    std::vector<Example> dataset = load_dataset(c.dataset_path);
    std::vector<Example> few_shot = few_shot_examples(c, dataset);
    auto records = read_emb1(out_path(c, "interpolations.emb"));
    auto pairs = read_seed_pairs_csv(out_path(c, "seed_pairs.csv"));
    std::unordered_map<std::string, const SeedPair*> pair_by_region;
    for (const auto& p : pairs) pair_by_region.emplace(p.region_id, &p);

    SeedTextResolver resolver = make_seed_text_resolver(dataset);
    DecodeConfig dcfg;
    dcfg.max_tokens = c.decode_max_tokens;
    dcfg.temperature = c.decode_temperature;
    dcfg.retry = RetryPolicy{c.max_attempts, c.backoff_ms};
    dcfg.few_shot = few_shot;

    std::vector<DecodedText> decoded(records.size());
    parallel_for_index(records.size(), c.parallelism, [&](size_t i) {
        const TokenizedEmbedding& te = records[i];
        if (!starts_with(te.example_id, "interp:")) {
            throw ConfigError("decode: unexpected record id " + te.example_id);
        }
        InterpolatedEmbedding interp;
        interp.region_id = te.example_id.substr(7);
        interp.n_dim = te.n_dim;
        interp.m_tokens = te.m_tokens;
        interp.matrix = te.matrix;
        auto it = pair_by_region.find(interp.region_id);
        if (it == pair_by_region.end()) {
            throw ConfigError("decode: no seed pair for region " + interp.region_id);
        }
        interp.seed_ids = {it->second->first_id, it->second->second_id};
        auto client = new_decode_client(c, resolver);
        decoded[i] = {interp.region_id, decode_interpolation(*client, interp, dcfg)};
    });
    write_decoded_jsonl(out_path(c, "decoded.jsonl"), decoded);
}

void stage_generate(const RunConfig& c) {
    validate_config(c);
    std::vector<Example> dataset = load_dataset(c.dataset_path);
    auto pairs = read_seed_pairs_csv(out_path(c, "seed_pairs.csv"));
    auto decoded = read_decoded_jsonl(out_path(c, "decoded.jsonl"));

    std::unordered_map<std::string, const Example*> ex_by_id;
    for (const auto& ex : dataset) ex_by_id.emplace(ex.id, &ex);
    std::unordered_map<std::string, const SeedPair*> pair_by_region;
    for (const auto& p : pairs) pair_by_region.emplace(p.region_id, &p);

    std::vector<ItemOutcome> outcomes(decoded.size());
    parallel_for_index(decoded.size(), c.parallelism, [&](size_t i) {
        const DecodedText& d = decoded[i];
        auto pit = pair_by_region.find(d.region_id);
        if (pit == pair_by_region.end()) {
            throw ConfigError("generate: no seed pair for region " + d.region_id);
        }
        auto s1 = ex_by_id.find(pit->second->first_id);
        auto s2 = ex_by_id.find(pit->second->second_id);
        if (s1 == ex_by_id.end() || s2 == ex_by_id.end()) {
            throw ConfigError("generate: seed ids for region " + d.region_id +
                              " not in dataset");
        }
        Provenance prov;
        prov.region_id = d.region_id;
        prov.seed_ids = {s1->second->id, s2->second->id};
        prov.method = GenerationMethod::embed_sdg;
        prov.decoded_text = d.text;

        auto teacher = new_teacher_client(c);
        std::string prompt = build_generation_prompt(*s1->second, *s2->second, d.text);
        RawGeneration raw = generate(*teacher, prompt, RetryPolicy{c.max_attempts, c.backoff_ms});
        try {
            ParsedGeneration parsed = parse_synthetic(raw, prov, "gen-" + d.region_id);
            auto findings = validate_example(parsed.example, {*s1->second, *s2->second});
            if (!findings.empty()) {
                std::string joined;
                for (const auto& f : findings) {
                    if (!joined.empty()) joined += "; ";
                    joined += f;
                }
                outcomes[i].quarantine = {prov, raw.text, "validation: " + joined};
            } else {
                outcomes[i].accepted = true;
                outcomes[i].example = std::move(parsed.example);
            }
        } catch (const ParseError& e) {
            outcomes[i].quarantine = {prov, e.raw_text, std::string("parse: ") + e.what()};
        }
    });

    std::vector<SyntheticExample> accepted;
    std::vector<QuarantineRecord> quarantined;
    for (auto& o : outcomes) {
        if (o.accepted) accepted.push_back(std::move(o.example));
        else quarantined.push_back(std::move(o.quarantine));
    }
    save_dataset(accepted, out_path(c, "generated.jsonl"));
    write_quarantine_jsonl(out_path(c, "quarantine.jsonl"), quarantined);
}

void stage_analyze(const RunConfig& c, const std::string& predictions_path) {
    validate_config(c);
    auto points = read_reduced_points_csv(out_path(c, "reduced_points.csv"));
    auto predictions = read_predictions_jsonl(predictions_path);
    DetectionResult det = detect_from_points(c, points);
    auto accuracy = region_accuracy(points, predictions, det.scan.spec, c.min_count);
    std::optional<CorrelationReport> correlation;
    if (accuracy.size() >= 3) correlation = correlate_regions(accuracy);
    emit_reports(det.scan, det.histogram, det.regions, accuracy, correlation, c.out_dir);
}

}  // namespace sparsegen
