#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sparsegen/embedding.hpp"

namespace sparsegen {

struct BoundingBox {
    std::vector<double> min;
    std::vector<double> max;
    uint32_t dims() const { return static_cast<uint32_t>(min.size()); }
};

struct GridSpec {
    std::vector<double> cell_size;  // per-dimension extents
    std::vector<double> stride;     // per-dimension step; empty = cell_size
    uint64_t threshold = 1;

    void validate(uint32_t dims) const;
    std::vector<double> effective_stride() const;
};

struct CellDensity {
    std::string cell_id;
    std::vector<double> origin;
    uint64_t count = 0;
    std::vector<std::string> member_ids;  // sorted ascending
};

// One grid pass over a bounding box. Cells are stored row-major over the
// per-dimension index grid, which orders them lexicographically by origin.
struct GridScan {
    GridSpec spec;
    BoundingBox box;
    std::vector<uint32_t> shape;  // cells per dimension
    std::vector<CellDensity> cells;

    size_t flat_index(const std::vector<uint32_t>& idx) const;
    std::vector<uint32_t> unflatten(size_t flat) const;
};

struct DensityHistogram {
    std::map<uint64_t, uint64_t> buckets;  // non-zero count -> number of cells
    uint64_t empty_cells = 0;
    uint64_t total_cells = 0;
};

struct SparseRegion {
    std::string region_id;
    std::vector<double> origin;
    std::vector<double> cell_size;
    std::vector<std::string> member_ids;
    uint64_t count = 0;
};

struct ThresholdPolicy {
    double percentile = 5.0;           // used when override_threshold is absent
    std::optional<uint64_t> override_threshold;
};

struct ThresholdResult {
    uint64_t threshold = 0;
    std::string warning;  // empty when the policy applied cleanly
};

// Exact per-dimension extrema. Errors on empty input.
BoundingBox bounding_box(const std::vector<ReducedPoint>& points);

// Counts points per cell. Membership is half-open [origin, origin+cell_size)
// per dimension, except that points exactly on the box maximum belong to the
// last cell of that dimension. Zero-count cells are emitted too.
GridScan scan_grid(const std::vector<ReducedPoint>& points, const GridSpec& spec,
                   const BoundingBox& box);

DensityHistogram density_histogram(const GridScan& scan);

// Smallest observed count c whose strictly-below cumulative share of
// non-empty cells reaches the percentile. Degenerate distributions fall back
// to the largest observed count, with a warning.
ThresholdResult select_threshold(const DensityHistogram& histogram, const ThresholdPolicy& policy);

// Cells with 1 <= count < threshold, minus the border-empty zone: the
// axis-connected component of zero-count cells touching the grid boundary,
// plus any cell whose axis neighbors all lie in that component. With
// overlapping strides, near-duplicate regions (IoU > 0.5) keep only the
// lower-count one.
std::vector<SparseRegion> detect_sparse_regions(const GridScan& scan, uint64_t threshold);

// Default cell sizing when the config does not give one: box extent / 32
// per dimension (degenerate extents get a unit cell).
std::vector<double> default_cell_size(const BoundingBox& box);

}  // namespace sparsegen
