#include "sparsegen/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "sparsegen/util.hpp"

namespace sparsegen {

uint64_t region_rng_seed(uint64_t global_seed, const std::string& region_id) {
    return global_seed ^ fnv1a64(region_id);
}

namespace {

// Distance from a point to one face of the region's cell. The face sits at
// `face_coord` along `axis` and spans the cell extent in the other
// dimensions; excess outside that span counts toward the distance.
double face_distance(const std::vector<double>& coords, const SparseRegion& region,
                     uint32_t axis, double face_coord) {
    double sq = 0.0;
    for (size_t d = 0; d < coords.size(); ++d) {
        double excess;
        if (d == axis) {
            excess = coords[d] - face_coord;
        } else {
            double lo = region.origin[d];
            double hi = region.origin[d] + region.cell_size[d];
            excess = coords[d] < lo ? lo - coords[d] : (coords[d] > hi ? coords[d] - hi : 0.0);
        }
        sq += excess * excess;
    }
    return std::sqrt(sq);
}

}  // namespace

SeedSelection select_seed_pair(const SparseRegion& region,
                               const std::vector<ReducedPoint>& all_points, uint64_t rng_seed) {
    const uint32_t dims = static_cast<uint32_t>(region.origin.size());
    Rng rng(rng_seed);
    const uint32_t axis = static_cast<uint32_t>(rng.below(dims));

    std::unordered_map<std::string, const ReducedPoint*> by_id;
    for (const auto& p : all_points) by_id.emplace(p.id, &p);

    std::unordered_set<std::string> member_set(region.member_ids.begin(),
                                               region.member_ids.end());
    std::vector<const ReducedPoint*> members;
    for (const auto& id : region.member_ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw ConfigError("seed selection: member " + id + " has no reduced point");
        }
        members.push_back(it->second);
    }

    const double lo_edge = region.origin[axis];
    const double hi_edge = region.origin[axis] + region.cell_size[axis];
    const double band = 0.25 * region.cell_size[axis];

    std::vector<const ReducedPoint*> low_band, high_band;
    for (const auto* p : members) {
        double x = p->coords[axis];
        if (x < lo_edge + band) low_band.push_back(p);
        if (x >= hi_edge - band) high_band.push_back(p);
    }
    auto by_point_id = [](const ReducedPoint* a, const ReducedPoint* b) { return a->id < b->id; };
    std::sort(low_band.begin(), low_band.end(), by_point_id);
    std::sort(high_band.begin(), high_band.end(), by_point_id);

    // Nearest non-member within one cell_size of the face; ties by id.
    auto fallback = [&](double face_coord,
                        const std::string& exclude) -> const ReducedPoint* {
        const ReducedPoint* best = nullptr;
        double best_dist = 0.0;
        for (const auto& p : all_points) {
            if (member_set.count(p.id) || p.id == exclude) continue;
            double dist = face_distance(p.coords, region, axis, face_coord);
            if (dist > region.cell_size[axis]) continue;
            if (!best || dist < best_dist || (dist == best_dist && p.id < best->id)) {
                best = &p;
                best_dist = dist;
            }
        }
        return best;
    };

    SeedPair pair;
    pair.region_id = region.region_id;
    pair.axis = axis;

    if (!low_band.empty()) {
        pair.first_id = low_band[rng.below(low_band.size())]->id;
    } else if (const ReducedPoint* p = fallback(lo_edge, "")) {
        pair.first_id = p->id;
        pair.first_fallback = true;
    } else {
        return {std::nullopt, "insufficient candidates"};
    }

    std::vector<const ReducedPoint*> high_candidates;
    for (const auto* p : high_band) {
        if (p->id != pair.first_id) high_candidates.push_back(p);
    }
    if (!high_candidates.empty()) {
        pair.second_id = high_candidates[rng.below(high_candidates.size())]->id;
    } else if (const ReducedPoint* p = fallback(hi_edge, pair.first_id)) {
        pair.second_id = p->id;
        pair.second_fallback = true;
    } else {
        return {std::nullopt, "insufficient candidates"};
    }

    return {pair, ""};
}

}  // namespace sparsegen
