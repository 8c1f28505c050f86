#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vesselgen {

// Centerline point: position plus cross-section radius.
struct NodeAttr {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double r = 0.0;
};

// Rooted binary tree of centerline points. Node indices are positions in
// `attrs`; absent children are -1. A node with a single child keeps it in
// the RIGHT slot (decoder convention).
struct VesselTree {
    std::vector<NodeAttr> attrs;
    std::vector<int> left;
    std::vector<int> right;
    int root = 0;

    int size() const { return static_cast<int>(attrs.size()); }
    bool has_left(int i) const { return left[i] >= 0; }
    bool has_right(int i) const { return right[i] >= 0; }
    int degree(int i) const { return (has_left(i) ? 1 : 0) + (has_right(i) ? 1 : 0); }
};

// Undirected centerline graph as parsed from a document; may contain
// multifurcations but never cycles.
struct RawCenterlineGraph {
    std::vector<NodeAttr> attrs;
    std::vector<std::vector<int>> adj;

    int size() const { return static_cast<int>(attrs.size()); }
};

// Affine maps taking raw attributes into [0,1]: one shared map for x,y,z
// and a separate one for r.
struct NormParams {
    double spatial_min = 0.0;
    double spatial_max = 1.0;
    double r_min = 0.0;
    double r_max = 1.0;
};

struct TreeStats {
    int node_count = 0;
    int bifurcation_count = 0;
    int height = 0;
};

// Throws std::runtime_error when a tree violates its invariants
// (connectivity, out-degree, single-child-right slot, finite attrs).
void validate(const VesselTree& t);

// Depth of every node (root = 0); -1 for nodes unreachable from the root.
std::vector<int> node_depths(const VesselTree& t);
int tree_height(const VesselTree& t);
std::vector<int> node_parents(const VesselTree& t);

// Directs `g` away from `root` and splits multifurcations by inserting
// intermediate nodes that copy the original node's attributes.
VesselTree binarize(const RawCenterlineGraph& g, int root);

// Re-roots the tree at the node minimizing rooted height over all nodes of
// the underlying undirected graph; ties broken by smallest node index.
VesselTree rebalance(const VesselTree& t);

// Removes all nodes at depth > max_height.
VesselTree trim(const VesselTree& t, int max_height);

// Ramer-Douglas-Peucker simplification applied per branch (maximal paths
// between root/bifurcation/leaf nodes); branch endpoints are always kept.
VesselTree resample_rdp(const VesselTree& t, double epsilon);

NormParams compute_norm_params(std::span<const VesselTree> trees);
VesselTree normalize(const VesselTree& t, const NormParams& p);
VesselTree denormalize(const VesselTree& t, const NormParams& p);
std::pair<std::vector<VesselTree>, NormParams> normalize_corpus(std::span<const VesselTree> trees);

TreeStats tree_stats(const VesselTree& t);

// Maximal paths whose endpoints are the root, bifurcation nodes, or leaves
// and whose interior nodes have exactly one child; ordered top-down.
std::vector<std::vector<int>> branch_decomposition(const VesselTree& t);

} // namespace vesselgen
