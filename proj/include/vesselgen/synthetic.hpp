#pragma once

#include "vesselgen/tree.hpp"

#include <cstdint>
#include <vector>

namespace vesselgen {

// Recursive bifurcation growth used to generate desk-scale fixture corpora.
struct BranchingParams {
    int max_height = 5;
    double branch_prob = 0.35;   // chance of a bifurcation at each non-leaf node
    double radius_decay = 0.8;   // child radius = decay * parent radius, exactly
    double step_min = 0.5;       // per-edge segment length range
    double step_max = 1.5;
    double jitter = 0.35;        // direction noise per segment
    double spread = 0.9;         // lateral separation of bifurcation children
    double root_radius_min = 0.6;
    double root_radius_max = 1.4;
};

std::vector<VesselTree> generate_synthetic_corpus(int n, std::uint64_t seed,
                                                  const BranchingParams& params = {});

} // namespace vesselgen
