#pragma once

#include "vesselgen/rvnn.hpp"
#include "vesselgen/tree.hpp"

#include <cstdint>
#include <vector>

namespace vesselgen {

struct GenerationResult {
    std::vector<VesselTree> trees; // denormalized (raw units)
    int rejected = 0;
};

// Draws z ~ N(0, I) per tree, free-decodes, and denormalizes. Draws that
// produce fewer than 2 nodes or any nonpositive radius are rejected and
// redrawn; more than 10*n attempts signals a degenerate model and throws.
// Each attempt uses its own RNG stream derived from (seed, attempt), so
// results are deterministic regardless of rejection pattern.
GenerationResult sample_trees(const RvnnModel<float>& model, const NormParams& norm, int n,
                              std::uint64_t seed, int max_depth);

} // namespace vesselgen
