// sparsegen: embedding-space targeted synthetic data generation.
//
// Each pipeline stage is its own subcommand so partial reruns and audits can
// work from the on-disk artifacts; `run` and `baseline` execute a whole pass.

#include <cstdio>
#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "sparsegen/mocks.hpp"
#include "sparsegen/pipeline.hpp"
#include "sparsegen/util.hpp"

using namespace sparsegen;

namespace {

struct CliState {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_common_options(CLI::App* cmd, CliState& state) {
    cmd->add_option("--config", state.config_path, "config file with key = value lines");
    auto opt = [cmd, &state](const std::string& flag, const std::string& key,
                             const std::string& desc) {
        cmd->add_option_function<std::string>(
            flag, [&state, key](const std::string& v) { state.overrides.emplace_back(key, v); },
            desc);
    };
    opt("--dataset", "dataset", "seed dataset (JSONL with id/input/output)");
    opt("--out", "out_dir", "output directory for artifacts");
    opt("--seed", "seed", "RNG seed");
    opt("--target", "target", "number of examples to generate");
    opt("--k", "k", "reduced dimensionality (2 or 3)");
    opt("--reducer", "reducer", "pca or tsne");
    opt("--cell-size", "cell_size", "grid cell size (one value or k comma-separated)");
    opt("--stride", "stride", "grid stride (defaults to cell size)");
    opt("--threshold", "threshold", "explicit sparsity threshold T (0 = percentile policy)");
    opt("--percentile", "percentile", "non-empty-cell percentile for the threshold policy");
    opt("--min-count", "min_count", "minimum predictions per cell for accuracy aggregation");
    opt("--embedding-source", "embedding_source", "mock or file");
    opt("--embedding-file", "embedding_file", "EMB1 file for the file embedding source");
    opt("--mock-n-dim", "mock_n_dim", "embedding dimensionality of the mock provider");
    opt("--decode-endpoint", "decode_endpoint", "mock or a /v1/decode base URL");
    opt("--teacher-endpoint", "teacher_endpoint", "mock or a chat-completions URL");
    opt("--teacher-model", "teacher_model", "model name sent to the teacher");
    opt("--teacher-temperature", "teacher_temperature", "teacher sampling temperature");
    opt("--teacher-max-tokens", "teacher_max_tokens", "teacher completion budget");
    opt("--decode-max-tokens", "decode_max_tokens", "decode completion budget");
    opt("--decode-temperature", "decode_temperature", "decode sampling temperature");
    opt("--few-shot-ids", "few_shot_ids", "4 example ids for the decode prompt slots");
    opt("--parallelism", "parallelism", "max in-flight backend requests");
    opt("--max-attempts", "max_attempts", "attempts per backend request");
    opt("--backoff-ms", "backoff_ms", "initial retry backoff in milliseconds");
    opt("--tsne-perplexity", "tsne_perplexity", "t-SNE perplexity");
    opt("--tsne-iterations", "tsne_iterations", "t-SNE gradient descent iterations");
    cmd->add_flag_callback("--mock-teacher", [&state] {
        state.overrides.emplace_back("teacher_endpoint", "mock");
    });
    cmd->add_flag_callback("--mock-decode", [&state] {
        state.overrides.emplace_back("decode_endpoint", "mock");
    });
    cmd->add_flag_callback("--mock-embeddings", [&state] {
        state.overrides.emplace_back("embedding_source", "mock");
    });
}

RunConfig build_config(const CliState& state) {
    RunConfig config =
        state.config_path.empty() ? RunConfig{} : load_config_file(state.config_path);
    for (const auto& [key, value] : state.overrides) {
        apply_config_value(config, key, value);
    }
    return config;
}

void print_manifest_summary(const RunManifest& m) {
    std::printf("points=%llu cells=%llu sparse_regions=%llu seed_pairs=%llu\n",
                (unsigned long long)m.counts.points, (unsigned long long)m.counts.cells,
                (unsigned long long)m.counts.sparse_regions,
                (unsigned long long)m.counts.seed_pairs);
    std::printf("generations=%llu accepted=%llu quarantined=%llu (%s)\n",
                (unsigned long long)m.counts.generations, (unsigned long long)m.counts.accepted,
                (unsigned long long)m.counts.quarantined, m.stop_reason.c_str());
}

int serve_mock(const std::string& host, int port, const std::string& dataset_path) {
    SeedTextResolver resolver;
    if (!dataset_path.empty()) {
        resolver = make_seed_text_resolver(load_dataset(dataset_path));
    }

    httplib::Server server;
    server.Post("/v1/decode", [resolver](const httplib::Request& req, httplib::Response& res) {
        try {
            DecodeRequest dreq = decode_request_from_json(nlohmann::json::parse(req.body));
            DecodeResponse dresp = mock_decode(dreq, resolver);
            res.set_content(decode_response_to_json(dresp).dump(), "application/json");
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
        }
    });
    server.Post("/v1/chat/completions",
                [](const httplib::Request& req, httplib::Response& res) {
                    try {
                        auto j = nlohmann::json::parse(req.body);
                        std::string prompt =
                            j.at("messages").back().at("content").get<std::string>();
                        nlohmann::ordered_json msg;
                        msg["role"] = "assistant";
                        msg["content"] = mock_teacher(prompt);
                        nlohmann::ordered_json out;
                        out["model"] = j.value("model", "mock-teacher");
                        out["choices"] =
                            nlohmann::ordered_json::array({{{"index", 0}, {"message", msg}}});
                        res.set_content(out.dump(), "application/json");
                    } catch (const std::exception& e) {
                        res.status = 400;
                        res.set_content(nlohmann::json{{"error", e.what()}}.dump(),
                                        "application/json");
                    }
                });

    std::printf("mock server listening on http://%s:%d\n", host.c_str(), port);
    std::fflush(stdout);
    if (!server.listen(host.c_str(), port)) {
        throw BackendError("mock server failed to bind " + host + ":" + std::to_string(port));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"embedding-space targeted synthetic data generation"};
    app.require_subcommand(1);

    CliState state;
    std::function<void(const RunConfig&)> action;

    auto stage = [&](const char* name, const char* desc,
                     std::function<void(const RunConfig&)> fn) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        add_common_options(cmd, state);
        cmd->callback([&action, fn] { action = fn; });
        return cmd;
    };

    stage("embed", "fetch token embeddings into embeddings.emb", stage_embed);
    stage("reduce", "pool and reduce embeddings to reduced_points.csv", stage_reduce);
    stage("scan", "grid-scan the reduced space into cells.csv + density_histogram.csv",
          stage_scan);
    stage("detect", "detect sparse regions into sparse_regions.csv", stage_detect);
    stage("seed", "select opposing-side seed pairs into seed_pairs.csv", stage_seed);
    stage("interpolate", "average seed pairs into interpolations.emb", stage_interpolate);
    stage("decode", "decode interpolations into decoded.jsonl", stage_decode);
    stage("generate", "prompt the teacher into generated.jsonl", stage_generate);
    stage("run", "full pipeline pass", [](const RunConfig& c) {
        print_manifest_summary(run_pipeline(c));
    });
    stage("baseline", "random-seed comparison pass", [](const RunConfig& c) {
        print_manifest_summary(run_baseline(c));
    });

    std::string predictions_path;
    CLI::App* analyze = stage("analyze", "aggregate per-region accuracy and correlation",
                              [&predictions_path](const RunConfig& c) {
                                  stage_analyze(c, predictions_path);
                              });
    analyze->add_option("--predictions", predictions_path,
                        "JSONL with {example_id, correct} records")
        ->required();

    CLI::App* mock_cmd = app.add_subcommand(
        "mock-server", "serve the mock decode and teacher backends over HTTP");
    std::string mock_host = "127.0.0.1";
    int mock_port = 8900;
    std::string mock_dataset;
    mock_cmd->add_option("--host", mock_host, "bind address");
    mock_cmd->add_option("--port", mock_port, "bind port");
    mock_cmd->add_option("--dataset", mock_dataset, "dataset for seed text fusion");

    CLI11_PARSE(app, argc, argv);

    try {
        if (mock_cmd->parsed()) {
            return serve_mock(mock_host, mock_port, mock_dataset);
        }
        action(build_config(state));
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const BackendError& e) {
        std::fprintf(stderr, "backend error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
