#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sparsegen/sparsity.hpp"

namespace sparsegen {

struct PredictionRecord {
    std::string example_id;
    bool correct = false;
};

struct RegionAccuracy {
    std::string cell_id;
    uint64_t count = 0;    // predictions falling in the cell
    double accuracy = 0.0;
};

struct CorrelationReport {
    double pearson_r = 0.0;
    double pearson_p = 0.0;
    double spearman_rho = 0.0;
    double spearman_p = 0.0;
    uint64_t n_regions = 0;
};

// Per-cell prediction accuracy over the grid; cells with fewer than
// min_count predictions are dropped. Every prediction id must resolve to a
// reduced point.
std::vector<RegionAccuracy> region_accuracy(const std::vector<ReducedPoint>& points,
                                            const std::vector<PredictionRecord>& predictions,
                                            const GridSpec& spec, uint64_t min_count = 3);

// Sample Pearson r with a two-sided p-value from the t distribution.
// Requires n >= 3 and non-zero variance on both sides.
std::pair<double, double> pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// Average ranks (ties share the mean rank), then Pearson on the ranks.
std::pair<double, double> spearman(const std::vector<double>& xs, const std::vector<double>& ys);

std::vector<double> average_ranks(const std::vector<double>& values);

// Correlation of per-cell density against per-cell accuracy.
CorrelationReport correlate_regions(const std::vector<RegionAccuracy>& regions);

// Deterministic CSV/JSON renderings of the report artifacts.
std::string histogram_to_csv(const DensityHistogram& histogram);
std::string regions_to_csv(uint32_t dims, const std::vector<SparseRegion>& regions);
std::string region_accuracy_to_csv(const std::vector<RegionAccuracy>& accuracy);
std::string correlation_to_json(const CorrelationReport& report);
CorrelationReport correlation_from_json(const std::string& text);

// Writes density_histogram.csv and sparse_regions.csv, plus
// region_accuracy.csv and correlation.json when the data is present.
// Deterministic bytes for identical input. Returns the files written.
std::vector<std::string> emit_reports(const GridScan& scan, const DensityHistogram& histogram,
                                      const std::vector<SparseRegion>& regions,
                                      const std::optional<std::vector<RegionAccuracy>>& accuracy,
                                      const std::optional<CorrelationReport>& correlation,
                                      const std::string& out_dir);

}  // namespace sparsegen
