#include <algorithm>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "sparsegen/sparsity.hpp"
#include "sparsegen/util.hpp"

using namespace sparsegen;

namespace {

std::vector<ReducedPoint> points_2d(const std::vector<std::pair<double, double>>& coords) {
    std::vector<ReducedPoint> out;
    for (size_t i = 0; i < coords.size(); ++i) {
        out.push_back({"p" + std::to_string(i), {coords[i].first, coords[i].second}});
    }
    return out;
}

// Literal point-in-cell rule, evaluated cell by cell over every point.
std::vector<uint64_t> exhaustive_counts(const std::vector<ReducedPoint>& points,
                                        const GridSpec& spec, const BoundingBox& box,
                                        const std::vector<uint32_t>& shape) {
    const auto stride = spec.effective_stride();
    const size_t dims = shape.size();
    size_t total = 1;
    for (auto s : shape) total *= s;
    std::vector<uint64_t> counts(total, 0);
    std::vector<uint32_t> idx(dims, 0);
    for (size_t flat = 0; flat < total; ++flat) {
        size_t rem = flat;
        for (size_t d = dims; d-- > 0;) {
            idx[d] = uint32_t(rem % shape[d]);
            rem /= shape[d];
        }
        for (const auto& p : points) {
            bool member = true;
            for (size_t d = 0; d < dims && member; ++d) {
                double origin = box.min[d] + double(idx[d]) * stride[d];
                double x = p.coords[d];
                bool inside = x >= origin && x < origin + spec.cell_size[d];
                bool on_max_edge = x == box.max[d] && idx[d] + 1 == shape[d] && x >= origin;
                member = inside || on_max_edge;
            }
            if (member) ++counts[flat];
        }
    }
    return counts;
}

}  // namespace

TEST_CASE("bounding_box basics and the linear-scan oracle") {
    CHECK_THROWS_AS(bounding_box({}), ConfigError);

    auto single = points_2d({{0.5, -1.0}});
    auto box1 = bounding_box(single);
    CHECK(box1.min == std::vector<double>{0.5, -1.0});
    CHECK(box1.max == std::vector<double>{0.5, -1.0});

    auto two = points_2d({{0, 0}, {1, 2}});
    auto box2 = bounding_box(two);
    CHECK(box2.min == std::vector<double>{0.0, 0.0});
    CHECK(box2.max == std::vector<double>{1.0, 2.0});

    Rng rng(12);
    std::vector<ReducedPoint> pts;
    for (int i = 0; i < 1000; ++i) {
        pts.push_back({"p" + std::to_string(i), {rng.unit() * 4 - 2, rng.unit() * 9 - 3}});
    }
    auto box = bounding_box(pts);
    double mn0 = pts[0].coords[0], mx0 = pts[0].coords[0];
    double mn1 = pts[0].coords[1], mx1 = pts[0].coords[1];
    for (const auto& p : pts) {
        mn0 = std::min(mn0, p.coords[0]);
        mx0 = std::max(mx0, p.coords[0]);
        mn1 = std::min(mn1, p.coords[1]);
        mx1 = std::max(mx1, p.coords[1]);
    }
    CHECK(box.min == std::vector<double>{mn0, mn1});
    CHECK(box.max == std::vector<double>{mx0, mx1});
}

TEST_CASE("scan_grid: quadrant construction") {
    auto pts = points_2d({{0.1, 0.1}, {0.7, 0.2}, {0.2, 0.8}, {0.9, 0.6}});
    BoundingBox box{{0.0, 0.0}, {1.0, 1.0}};
    GridSpec spec;
    spec.cell_size = {0.5, 0.5};
    auto scan = scan_grid(pts, spec, box);
    REQUIRE(scan.shape == std::vector<uint32_t>{2, 2});
    REQUIRE(scan.cells.size() == 4);
    for (const auto& cell : scan.cells) CHECK(cell.count == 1);

    // Empty one quadrant.
    auto pts3 = points_2d({{0.1, 0.1}, {0.7, 0.2}, {0.9, 0.6}});
    auto scan3 = scan_grid(pts3, spec, box);
    CHECK(scan3.cells[scan3.flat_index({0, 1})].count == 0);
}

TEST_CASE("scan_grid: box-max points land in the last cell") {
    auto pts = points_2d({{0.0, 0.0}, {1.0, 1.0}, {1.0, 0.0}});
    auto box = bounding_box(pts);
    GridSpec spec;
    spec.cell_size = {0.5, 0.5};
    auto scan = scan_grid(pts, spec, box);
    CHECK(scan.cells[scan.flat_index({0, 0})].count == 1);
    CHECK(scan.cells[scan.flat_index({1, 1})].count == 1);
    CHECK(scan.cells[scan.flat_index({1, 0})].count == 1);
    CHECK(scan.cells[scan.flat_index({0, 1})].count == 0);
}

TEST_CASE("scan_grid: cell larger than the box gives a single covering cell") {
    auto pts = points_2d({{0.2, 0.3}, {0.8, 0.9}});
    auto box = bounding_box(pts);
    GridSpec spec;
    spec.cell_size = {5.0, 5.0};
    auto scan = scan_grid(pts, spec, box);
    CHECK(scan.shape == std::vector<uint32_t>{1, 1});
    CHECK(scan.cells[0].count == 2);
}

TEST_CASE("scan_grid matches the exhaustive oracle on random specs") {
    Rng rng(99);
    std::vector<ReducedPoint> pts;
    for (int i = 0; i < 10000; ++i) {
        pts.push_back({"p" + std::to_string(i), {rng.unit() * 3.0 - 1.5, rng.unit() * 2.0}});
    }
    auto box = bounding_box(pts);
    for (int trial = 0; trial < 5; ++trial) {
        GridSpec spec;
        double c0 = 0.08 + rng.unit() * 0.5;
        double c1 = 0.08 + rng.unit() * 0.4;
        spec.cell_size = {c0, c1};
        if (trial == 1) {
            spec.stride = {c0 / 2.0, c1 / 2.0};  // overlapping
        } else if (trial == 2) {
            spec.stride = {c0 * 1.5, c1 * 1.5};  // gappy
        }
        auto scan = scan_grid(pts, spec, box);
        auto oracle = exhaustive_counts(pts, spec, box, scan.shape);
        REQUIRE(scan.cells.size() == oracle.size());
        for (size_t i = 0; i < oracle.size(); ++i) {
            CHECK(scan.cells[i].count == oracle[i]);
            CHECK(scan.cells[i].member_ids.size() == oracle[i]);
        }
        auto hist = density_histogram(scan);
        uint64_t from_buckets = hist.empty_cells;
        for (auto& [count, cells] : hist.buckets) from_buckets += cells;
        CHECK(from_buckets == scan.cells.size());
    }
}

TEST_CASE("scan_grid: tiling counts every point exactly once") {
    Rng rng(5);
    std::vector<ReducedPoint> pts;
    for (int i = 0; i < 3000; ++i) {
        pts.push_back({"p" + std::to_string(i), {rng.unit(), rng.unit()}});
    }
    auto box = bounding_box(pts);
    GridSpec spec;
    spec.cell_size = {0.13, 0.21};
    auto scan = scan_grid(pts, spec, box);
    uint64_t total = 0;
    for (const auto& cell : scan.cells) total += cell.count;
    CHECK(total == pts.size());
}

TEST_CASE("scan_grid output is invariant under input permutation") {
    Rng rng(31);
    std::vector<ReducedPoint> pts;
    for (int i = 0; i < 500; ++i) {
        pts.push_back({"p" + std::to_string(i), {rng.unit(), rng.unit()}});
    }
    auto box = bounding_box(pts);
    GridSpec spec;
    spec.cell_size = {0.25, 0.25};
    auto scan1 = scan_grid(pts, spec, box);

    std::mt19937 shuffler(4);
    std::shuffle(pts.begin(), pts.end(), shuffler);
    auto scan2 = scan_grid(pts, spec, box);
    REQUIRE(scan1.cells.size() == scan2.cells.size());
    for (size_t i = 0; i < scan1.cells.size(); ++i) {
        CHECK(scan1.cells[i].count == scan2.cells[i].count);
        CHECK(scan1.cells[i].member_ids == scan2.cells[i].member_ids);
    }
}

TEST_CASE("density_histogram tallies per-count buckets") {
    auto pts = points_2d({{0.1, 0.1}, {0.2, 0.2}, {0.3, 0.3},     // 3 in cell (0,0)
                          {0.9, 0.9}, {0.85, 0.95}, {0.8, 0.8}});  // 3 in cell (1,1)
    auto box = bounding_box(pts);
    GridSpec spec;
    spec.cell_size = {0.5, 0.5};
    auto hist = density_histogram(scan_grid(pts, spec, box));
    CHECK(hist.buckets == std::map<uint64_t, uint64_t>{{3, 2}});
    CHECK(hist.empty_cells == 2);
    CHECK(hist.total_cells == 4);
}

TEST_CASE("select_threshold follows the percentile rule") {
    DensityHistogram h;
    h.buckets = {{1, 50}, {5, 50}, {40, 900}};
    h.total_cells = 1000;
    auto r = select_threshold(h, {5.0, std::nullopt});
    CHECK(r.threshold == 5);
    CHECK(r.warning.empty());

    // Explicit override wins.
    auto o = select_threshold(h, {5.0, uint64_t(10)});
    CHECK(o.threshold == 10);

    // Degenerate: every non-empty cell has the same count.
    DensityHistogram d;
    d.buckets = {{7, 123}};
    auto rd = select_threshold(d, {5.0, std::nullopt});
    CHECK(rd.threshold == 7);
    CHECK(!rd.warning.empty());
}

TEST_CASE("detect_sparse_regions: planted hole is reported, borders excluded") {
    Rng rng(17);
    std::vector<ReducedPoint> pts;
    // Dense uniform cloud over [0,1]^2 with two carve-outs: a thinned cell
    // and a fully empty corner patch.
    auto thinned = [](double x, double y) {
        return x >= 0.5 && x < 0.625 && y >= 0.5 && y < 0.625;
    };
    auto corner = [](double x, double y) { return x < 0.25 && y < 0.25; };
    int kept_in_hole = 0;
    while (pts.size() < 4000) {
        double x = rng.unit(), y = rng.unit();
        if (corner(x, y)) continue;
        if (thinned(x, y)) {
            if (kept_in_hole >= 3) continue;
            ++kept_in_hole;
        }
        pts.push_back({"p" + std::to_string(pts.size()), {x, y}});
    }
    // Anchor the box so the carved corner stays inside the grid.
    pts.push_back({"anchor", {0.0, 0.0}});
    auto box = bounding_box(pts);
    GridSpec spec;
    spec.cell_size = {0.125, 0.125};  // 8x8 grid, ~62 points per cell
    auto scan = scan_grid(pts, spec, box);
    auto regions = detect_sparse_regions(scan, 10);

    bool found_hole = false;
    for (const auto& r : regions) {
        CHECK(r.count >= 1);
        CHECK(r.count < 10);
        CHECK(r.member_ids.size() == r.count);
        // Nothing from the empty corner: its cells hold zero points, and the
        // anchor cell is surrounded by the border-empty zone.
        bool in_corner = r.origin[0] < 0.25 && r.origin[1] < 0.25;
        CHECK(!in_corner);
        if (std::abs(r.origin[0] - 0.5) < 1e-9 && std::abs(r.origin[1] - 0.5) < 1e-9) {
            found_hole = true;
            CHECK(r.count == 3);
        }
    }
    CHECK(found_hole);
}

TEST_CASE("detect_sparse_regions: dense data yields nothing") {
    Rng rng(8);
    std::vector<ReducedPoint> pts;
    for (int i = 0; i < 2000; ++i) {
        pts.push_back({"p" + std::to_string(i), {rng.unit(), rng.unit()}});
    }
    auto box = bounding_box(pts);
    GridSpec spec;
    spec.cell_size = {0.5, 0.5};  // ~500 points per cell
    auto scan = scan_grid(pts, spec, box);
    CHECK(detect_sparse_regions(scan, 10).empty());
}

TEST_CASE("detect_sparse_regions: overlapping strides suppress near-duplicates") {
    // A lone pair of points in an otherwise populated row; half-cell stride
    // makes two overlapping cells see them.
    std::vector<ReducedPoint> pts;
    for (int i = 0; i < 40; ++i) {
        pts.push_back({"d" + std::to_string(i), {0.0125 + 0.025 * (i % 40), 0.9}});
        pts.push_back({"e" + std::to_string(i), {0.0125 + 0.025 * (i % 40), 0.1}});
    }
    pts.push_back({"lonely1", {0.51, 0.5}});
    pts.push_back({"lonely2", {0.53, 0.5}});
    pts.push_back({"c0", {0.0, 0.0}});
    pts.push_back({"c1", {1.0, 1.0}});
    auto box = bounding_box(pts);
    GridSpec spec;
    spec.cell_size = {0.2, 0.2};
    spec.stride = {0.1, 0.1};
    auto scan = scan_grid(pts, spec, box);
    auto regions = detect_sparse_regions(scan, 10);
    int covering = 0;
    for (const auto& r : regions) {
        bool covers = r.origin[0] <= 0.51 && 0.53 < r.origin[0] + r.cell_size[0] &&
                      r.origin[1] <= 0.5 && 0.5 < r.origin[1] + r.cell_size[1];
        if (covers) ++covering;
        // IoU > 0.5 pairs must not survive together.
        for (const auto& other : regions) {
            if (&other == &r) continue;
            double inter = 1.0, va = 1.0, vb = 1.0;
            for (size_t d = 0; d < 2; ++d) {
                double lo = std::max(r.origin[d], other.origin[d]);
                double hi = std::min(r.origin[d] + r.cell_size[d],
                                     other.origin[d] + other.cell_size[d]);
                inter *= std::max(0.0, hi - lo);
                va *= r.cell_size[d];
                vb *= other.cell_size[d];
            }
            CHECK(inter / (va + vb - inter) <= 0.5);
        }
    }
    CHECK(covering >= 1);
}
