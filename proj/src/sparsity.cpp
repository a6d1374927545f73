#include "sparsegen/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "sparsegen/util.hpp"

namespace sparsegen {

void GridSpec::validate(uint32_t dims) const {
    if (cell_size.size() != dims) {
        throw ConfigError("grid: cell_size has " + std::to_string(cell_size.size()) +
                          " dims, expected " + std::to_string(dims));
    }
    for (double c : cell_size) {
        if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("grid: cell_size must be > 0");
    }
    if (!stride.empty()) {
        if (stride.size() != dims) throw ConfigError("grid: stride dimensionality mismatch");
        for (double s : stride) {
            if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("grid: stride must be > 0");
        }
    }
    if (threshold < 1) throw ConfigError("grid: threshold must be >= 1");
}

std::vector<double> GridSpec::effective_stride() const {
    return stride.empty() ? cell_size : stride;
}

size_t GridScan::flat_index(const std::vector<uint32_t>& idx) const {
    size_t flat = 0;
    for (size_t d = 0; d < shape.size(); ++d) flat = flat * shape[d] + idx[d];
    return flat;
}

std::vector<uint32_t> GridScan::unflatten(size_t flat) const {
    std::vector<uint32_t> idx(shape.size());
    for (size_t d = shape.size(); d-- > 0;) {
        idx[d] = static_cast<uint32_t>(flat % shape[d]);
        flat /= shape[d];
    }
    return idx;
}

BoundingBox bounding_box(const std::vector<ReducedPoint>& points) {
    if (points.empty()) throw ConfigError("bounding_box: no points");
    const size_t dims = points[0].coords.size();
    BoundingBox box;
    box.min = points[0].coords;
    box.max = points[0].coords;
    for (const auto& p : points) {
        if (p.coords.size() != dims) {
            throw ConfigError("bounding_box: inconsistent dimensionality at " + p.id);
        }
        for (size_t d = 0; d < dims; ++d) {
            box.min[d] = std::min(box.min[d], p.coords[d]);
            box.max[d] = std::max(box.max[d], p.coords[d]);
        }
    }
    return box;
}

namespace {

std::string cell_id_for(size_t flat) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "c%06zu", flat);
    return buf;
}

std::string region_id_for(size_t flat) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "r%06zu", flat);
    return buf;
}

// Cells per dimension: origins min + i*stride while they stay strictly below
// the box max; degenerate extents still get one cell.
uint32_t cells_along(double min, double max, double stride) {
    uint32_t n = 1;
    while (min + double(n) * stride < max) {
        ++n;
        if (n > (1u << 24)) throw ConfigError("grid: too many cells along one dimension");
    }
    return n;
}

// Half-open membership with the box-max closure on the last cell.
inline bool in_cell_dim(double x, double origin, double cell, double box_max, bool last) {
    if (x < origin) return false;
    if (x < origin + cell) return true;
    return last && x == box_max;
}

}  // namespace

GridScan scan_grid(const std::vector<ReducedPoint>& points, const GridSpec& spec,
                   const BoundingBox& box) {
    const uint32_t dims = box.dims();
    if (dims == 0) throw ConfigError("scan_grid: zero-dimensional box");
    spec.validate(dims);
    const std::vector<double> stride = spec.effective_stride();

    GridScan scan;
    scan.spec = spec;
    scan.box = box;
    scan.shape.resize(dims);
    size_t total = 1;
    for (uint32_t d = 0; d < dims; ++d) {
        scan.shape[d] = cells_along(box.min[d], box.max[d], stride[d]);
        total *= scan.shape[d];
        if (total > (size_t(1) << 24)) throw ConfigError("grid: too many cells");
    }

    scan.cells.resize(total);
    for (size_t flat = 0; flat < total; ++flat) {
        auto idx = scan.unflatten(flat);
        CellDensity& cell = scan.cells[flat];
        cell.cell_id = cell_id_for(flat);
        cell.origin.resize(dims);
        for (uint32_t d = 0; d < dims; ++d) {
            cell.origin[d] = box.min[d] + double(idx[d]) * stride[d];
        }
    }

    // Candidate index windows are derived from the stride arithmetic but
    // widened by one, then filtered with the exact membership test, so the
    // result matches a brute-force point-in-cell scan bit for bit.
    std::vector<int64_t> lo(dims), hi(dims);
    std::vector<uint32_t> idx(dims);
    for (const auto& p : points) {
        if (p.coords.size() != dims) {
            throw ConfigError("scan_grid: point dimensionality mismatch at " + p.id);
        }
        bool outside = false;
        for (uint32_t d = 0; d < dims; ++d) {
            double rel = p.coords[d] - box.min[d];
            int64_t anchor = int64_t(std::floor(rel / stride[d]));
            lo[d] = std::max<int64_t>(
                0, int64_t(std::floor((rel - spec.cell_size[d]) / stride[d])) - 1);
            hi[d] = std::min<int64_t>(int64_t(scan.shape[d]) - 1, anchor + 1);
            if (lo[d] > hi[d]) {
                outside = true;
                break;
            }
        }
        if (outside) continue;

        // Walk the (small) candidate window.
        for (uint32_t d = 0; d < dims; ++d) idx[d] = uint32_t(lo[d]);
        for (;;) {
            bool member = true;
            for (uint32_t d = 0; d < dims && member; ++d) {
                double origin = box.min[d] + double(idx[d]) * stride[d];
                member = in_cell_dim(p.coords[d], origin, spec.cell_size[d], box.max[d],
                                     idx[d] + 1 == scan.shape[d]);
            }
            if (member) {
                CellDensity& cell = scan.cells[scan.flat_index(idx)];
                ++cell.count;
                cell.member_ids.push_back(p.id);
            }
            uint32_t d = dims;
            while (d-- > 0) {
                if (int64_t(idx[d]) < hi[d]) {
                    ++idx[d];
                    break;
                }
                idx[d] = uint32_t(lo[d]);
                if (d == 0) goto next_point;
            }
        }
    next_point:;
    }

    // Output must not depend on the input point order.
    for (auto& cell : scan.cells) {
        std::sort(cell.member_ids.begin(), cell.member_ids.end());
    }
    return scan;
}

DensityHistogram density_histogram(const GridScan& scan) {
    DensityHistogram h;
    h.total_cells = scan.cells.size();
    for (const auto& cell : scan.cells) {
        if (cell.count == 0) {
            ++h.empty_cells;
        } else {
            ++h.buckets[cell.count];
        }
    }
    return h;
}

ThresholdResult select_threshold(const DensityHistogram& histogram,
                                 const ThresholdPolicy& policy) {
    if (policy.override_threshold) {
        return {*policy.override_threshold, ""};
    }
    if (histogram.buckets.empty()) {
        throw ConfigError("select_threshold: no non-empty cells");
    }
    uint64_t nonempty = 0;
    for (const auto& [count, cells] : histogram.buckets) nonempty += cells;
    const double needed = policy.percentile / 100.0 * double(nonempty);

    uint64_t below = 0;
    for (const auto& [count, cells] : histogram.buckets) {
        if (double(below) >= needed) {
            return {count, ""};
        }
        below += cells;
    }
    // No observed count has enough mass strictly below it (e.g. every cell
    // holds the same count). Fall back to the largest observed count.
    uint64_t last = histogram.buckets.rbegin()->first;
    return {last, "degenerate density histogram; using threshold " + std::to_string(last)};
}

namespace {

// Border-empty zone: flood-fill zero-count cells from the grid boundary
// through axis-neighbor adjacency.
std::vector<char> border_empty_zone(const GridScan& scan) {
    const size_t total = scan.cells.size();
    std::vector<char> in_zone(total, 0);
    std::deque<size_t> queue;

    auto touches_boundary = [&](const std::vector<uint32_t>& idx) {
        for (size_t d = 0; d < idx.size(); ++d) {
            if (idx[d] == 0 || idx[d] + 1 == scan.shape[d]) return true;
        }
        return false;
    };

    for (size_t flat = 0; flat < total; ++flat) {
        if (scan.cells[flat].count == 0 && touches_boundary(scan.unflatten(flat))) {
            in_zone[flat] = 1;
            queue.push_back(flat);
        }
    }
    while (!queue.empty()) {
        size_t flat = queue.front();
        queue.pop_front();
        auto idx = scan.unflatten(flat);
        for (size_t d = 0; d < idx.size(); ++d) {
            for (int step : {-1, 1}) {
                int64_t v = int64_t(idx[d]) + step;
                if (v < 0 || v >= int64_t(scan.shape[d])) continue;
                auto nidx = idx;
                nidx[d] = uint32_t(v);
                size_t nflat = scan.flat_index(nidx);
                if (!in_zone[nflat] && scan.cells[nflat].count == 0) {
                    in_zone[nflat] = 1;
                    queue.push_back(nflat);
                }
            }
        }
    }
    return in_zone;
}

double iou(const SparseRegion& a, const SparseRegion& b) {
    double inter = 1.0, va = 1.0, vb = 1.0;
    for (size_t d = 0; d < a.origin.size(); ++d) {
        double lo = std::max(a.origin[d], b.origin[d]);
        double hi = std::min(a.origin[d] + a.cell_size[d], b.origin[d] + b.cell_size[d]);
        inter *= std::max(0.0, hi - lo);
        va *= a.cell_size[d];
        vb *= b.cell_size[d];
    }
    double uni = va + vb - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace

std::vector<SparseRegion> detect_sparse_regions(const GridScan& scan, uint64_t threshold) {
    const std::vector<char> zone = border_empty_zone(scan);
    const uint32_t dims = scan.box.dims();

    auto surrounded_by_zone = [&](size_t flat) {
        auto idx = scan.unflatten(flat);
        bool has_neighbor = false;
        for (uint32_t d = 0; d < dims; ++d) {
            for (int step : {-1, 1}) {
                int64_t v = int64_t(idx[d]) + step;
                if (v < 0 || v >= int64_t(scan.shape[d])) continue;
                has_neighbor = true;
                auto nidx = idx;
                nidx[d] = uint32_t(v);
                if (!zone[scan.flat_index(nidx)]) return false;
            }
        }
        return has_neighbor;
    };

    std::vector<SparseRegion> regions;
    for (size_t flat = 0; flat < scan.cells.size(); ++flat) {
        const CellDensity& cell = scan.cells[flat];
        if (cell.count < 1 || cell.count >= threshold) continue;
        if (zone[flat] || surrounded_by_zone(flat)) continue;
        SparseRegion r;
        r.region_id = region_id_for(flat);
        r.origin = cell.origin;
        r.cell_size = scan.spec.cell_size;
        r.member_ids = cell.member_ids;
        r.count = cell.count;
        regions.push_back(std::move(r));
    }

    // Overlapping strides can emit near-duplicates; keep the sparser one.
    const std::vector<double> stride = scan.spec.effective_stride();
    bool overlapping = false;
    for (uint32_t d = 0; d < dims; ++d) {
        if (stride[d] < scan.spec.cell_size[d]) overlapping = true;
    }
    if (overlapping && regions.size() > 1) {
        std::vector<char> drop(regions.size(), 0);
        for (size_t i = 0; i < regions.size(); ++i) {
            for (size_t j = i + 1; j < regions.size(); ++j) {
                if (drop[i] || drop[j]) continue;
                if (iou(regions[i], regions[j]) > 0.5) {
                    if (regions[i].count <= regions[j].count) {
                        drop[j] = 1;
                    } else {
                        drop[i] = 1;
                    }
                }
            }
        }
        std::vector<SparseRegion> kept;
        for (size_t i = 0; i < regions.size(); ++i) {
            if (!drop[i]) kept.push_back(std::move(regions[i]));
        }
        regions = std::move(kept);
    }
    return regions;
}

std::vector<double> default_cell_size(const BoundingBox& box) {
    std::vector<double> cell(box.dims());
    for (uint32_t d = 0; d < box.dims(); ++d) {
        double extent = box.max[d] - box.min[d];
        cell[d] = extent > 0.0 ? extent / 32.0 : 1.0;
    }
    return cell;
}

}  // namespace sparsegen
