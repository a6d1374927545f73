#pragma once

#include <string>
#include <vector>

#include "sparsegen/analysis.hpp"
#include "sparsegen/embedding.hpp"
#include "sparsegen/seeding.hpp"

namespace sparsegen {

// Stage artifacts shared between CLI subcommands. All writers are
// deterministic: fixed field order, shortest round-trip float formatting,
// LF endings.

void write_reduced_points_csv(const std::string& path, const std::vector<ReducedPoint>& points);
std::vector<ReducedPoint> read_reduced_points_csv(const std::string& path);

void write_projector_json(const std::string& path, const Projector& projector);
Projector read_projector_json(const std::string& path);

void write_cells_csv(const std::string& path, const GridScan& scan);

void write_seed_pairs_csv(const std::string& path, const std::vector<SeedPair>& pairs);
std::vector<SeedPair> read_seed_pairs_csv(const std::string& path);

struct DecodedText {
    std::string region_id;
    std::string text;
};
void write_decoded_jsonl(const std::string& path, const std::vector<DecodedText>& decoded);
std::vector<DecodedText> read_decoded_jsonl(const std::string& path);

std::vector<PredictionRecord> read_predictions_jsonl(const std::string& path);

struct InterpolationPlacement {
    std::string region_id;
    std::vector<double> coords;
    bool in_cell = false;
};
void write_interpolated_points_csv(const std::string& path,
                                   const std::vector<InterpolationPlacement>& placements);

struct QuarantineRecord {
    Provenance provenance;
    std::string raw_text;
    std::string error;
};
void write_quarantine_jsonl(const std::string& path, const std::vector<QuarantineRecord>& records);

}  // namespace sparsegen
