#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparsegen/sparsity.hpp"

namespace sparsegen {

// Two examples picked from opposite faces of a sparse region's cell.
struct SeedPair {
    std::string region_id;
    std::string first_id;   // low side of the chosen axis
    std::string second_id;  // high side
    uint32_t axis = 0;
    bool first_fallback = false;
    bool second_fallback = false;
};

struct SeedSelection {
    std::optional<SeedPair> pair;
    std::string skip_reason;  // set when pair is absent
};

// Picks an axis uniformly at random, then one point uniformly from each
// outer-25% band of the cell along that axis. An empty band falls back to
// the nearest point (by distance to that cell face) outside the region but
// within one cell_size of the face. Deterministic for a fixed rng_seed.
SeedSelection select_seed_pair(const SparseRegion& region,
                               const std::vector<ReducedPoint>& all_points, uint64_t rng_seed);

// Per-region seed derivation so regions can be processed in parallel while
// staying reproducible.
uint64_t region_rng_seed(uint64_t global_seed, const std::string& region_id);

}  // namespace sparsegen
