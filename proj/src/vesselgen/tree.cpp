#include "vesselgen/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace vesselgen {

namespace {

bool finite_attr(const NodeAttr& a) {
    return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z) && std::isfinite(a.r);
}

// Distance from p to the segment [a, b], clamped to the endpoints.
double point_segment_distance(const NodeAttr& p, const NodeAttr& a, const NodeAttr& b) {
    const double vx = b.x - a.x, vy = b.y - a.y, vz = b.z - a.z;
    const double wx = p.x - a.x, wy = p.y - a.y, wz = p.z - a.z;
    const double vv = vx * vx + vy * vy + vz * vz;
    double t = 0.0;
    if (vv > 0.0) t = std::clamp((wx * vx + wy * vy + wz * vz) / vv, 0.0, 1.0);
    const double dx = wx - t * vx, dy = wy - t * vy, dz = wz - t * vz;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Keeps `keep[i]` flags for polyline indices [lo, hi] per RDP.
void rdp_mark(const std::vector<NodeAttr>& pts, int lo, int hi, double eps,
              std::vector<char>& keep) {
    if (hi - lo < 2) return;
    double dmax = -1.0;
    int imax = -1;
    for (int i = lo + 1; i < hi; ++i) {
        const double d = point_segment_distance(pts[i], pts[lo], pts[hi]);
        if (d > dmax) {
            dmax = d;
            imax = i;
        }
    }
    if (dmax > eps) {
        keep[imax] = 1;
        rdp_mark(pts, lo, imax, eps, keep);
        rdp_mark(pts, imax, hi, eps, keep);
    }
}

// Re-indexes a tree keeping only flagged nodes; edges are supplied by the
// caller as (parent, child, is_left) triples over old indices.
struct Rebuild {
    std::vector<int> old_to_new;
    VesselTree out;

    explicit Rebuild(const VesselTree& t, const std::vector<char>& keep)
        : old_to_new(t.attrs.size(), -1) {
        for (int i = 0; i < t.size(); ++i) {
            if (keep[i]) {
                old_to_new[i] = static_cast<int>(out.attrs.size());
                out.attrs.push_back(t.attrs[i]);
            }
        }
        out.left.assign(out.attrs.size(), -1);
        out.right.assign(out.attrs.size(), -1);
        out.root = old_to_new[t.root];
    }

    void link(int parent, int child, bool is_left) {
        const int p = old_to_new[parent];
        const int c = old_to_new[child];
        if (is_left)
            out.left[p] = c;
        else
            out.right[p] = c;
    }
};

} // namespace

void validate(const VesselTree& t) {
    const int n = t.size();
    if (n == 0) throw std::runtime_error("empty tree");
    if (static_cast<int>(t.left.size()) != n || static_cast<int>(t.right.size()) != n)
        throw std::runtime_error("child arrays do not match node count");
    if (t.root < 0 || t.root >= n) throw std::runtime_error("root index out of range");

    std::vector<int> indegree(n, 0);
    for (int i = 0; i < n; ++i) {
        if (!finite_attr(t.attrs[i])) throw std::runtime_error("non-finite attribute");
        for (int c : {t.left[i], t.right[i]}) {
            if (c == -1) continue;
            if (c < 0 || c >= n) throw std::runtime_error("child index out of range");
            ++indegree[c];
        }
        if (t.has_left(i) && !t.has_right(i))
            throw std::runtime_error("single child stored in left slot");
    }
    if (indegree[t.root] != 0) throw std::runtime_error("root has a parent");
    int reached = 0;
    std::deque<int> q{t.root};
    std::vector<char> seen(n, 0);
    seen[t.root] = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop_front();
        ++reached;
        for (int c : {t.left[u], t.right[u]}) {
            if (c == -1) continue;
            if (seen[c]) throw std::runtime_error("node reached twice (cycle or shared child)");
            if (indegree[c] != 1) throw std::runtime_error("node with multiple parents");
            seen[c] = 1;
            q.push_back(c);
        }
    }
    if (reached != n) throw std::runtime_error("disconnected nodes present");
}

std::vector<int> node_depths(const VesselTree& t) {
    std::vector<int> depth(t.size(), -1);
    std::deque<int> q{t.root};
    depth[t.root] = 0;
    while (!q.empty()) {
        const int u = q.front();
        q.pop_front();
        for (int c : {t.left[u], t.right[u]}) {
            if (c != -1) {
                depth[c] = depth[u] + 1;
                q.push_back(c);
            }
        }
    }
    return depth;
}

int tree_height(const VesselTree& t) {
    int h = 0;
    for (int d : node_depths(t)) h = std::max(h, d);
    return h;
}

std::vector<int> node_parents(const VesselTree& t) {
    std::vector<int> parent(t.size(), -1);
    for (int i = 0; i < t.size(); ++i) {
        if (t.has_left(i)) parent[t.left[i]] = i;
        if (t.has_right(i)) parent[t.right[i]] = i;
    }
    return parent;
}

VesselTree binarize(const RawCenterlineGraph& g, int root) {
    const int n = g.size();
    if (root < 0 || root >= n) throw std::runtime_error("binarize: root index out of range");

    VesselTree t;
    t.attrs = g.attrs;
    t.left.assign(n, -1);
    t.right.assign(n, -1);
    t.root = root;

    // Direct edges away from the root, collecting children in adjacency order.
    std::vector<std::vector<int>> children(n);
    std::vector<char> seen(n, 0);
    seen[root] = 1;
    std::deque<int> q{root};
    while (!q.empty()) {
        const int u = q.front();
        q.pop_front();
        for (int v : g.adj[u]) {
            if (seen[v]) continue;
            seen[v] = 1;
            children[u].push_back(v);
            q.push_back(v);
        }
    }
    for (int i = 0; i < n; ++i) {
        if (!seen[i]) throw std::runtime_error("binarize: graph is disconnected");
    }

    // Split multifurcations: a node keeps its first child on the left and
    // hands the rest to a chain of attribute copies on the right.
    std::deque<std::pair<int, std::vector<int>>> work;
    for (int i = 0; i < n; ++i) {
        if (!children[i].empty()) work.emplace_back(i, children[i]);
    }
    while (!work.empty()) {
        auto [node, kids] = work.front();
        work.pop_front();
        if (kids.size() == 1) {
            t.right[node] = kids[0];
        } else if (kids.size() == 2) {
            t.left[node] = kids[0];
            t.right[node] = kids[1];
        } else {
            const int copy = t.size();
            t.attrs.push_back(t.attrs[node]);
            t.left.push_back(-1);
            t.right.push_back(-1);
            t.left[node] = kids[0];
            t.right[node] = copy;
            work.emplace_back(copy, std::vector<int>(kids.begin() + 1, kids.end()));
        }
    }
    return t;
}

VesselTree rebalance(const VesselTree& t) {
    const int n = t.size();
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i) {
        for (int c : {t.left[i], t.right[i]}) {
            if (c != -1) {
                adj[i].push_back(c);
                adj[c].push_back(i);
            }
        }
    }

    auto rooted_height = [&](int root) {
        std::vector<int> depth(n, -1);
        depth[root] = 0;
        std::deque<int> q{root};
        int h = 0;
        while (!q.empty()) {
            const int u = q.front();
            q.pop_front();
            h = std::max(h, depth[u]);
            for (int v : adj[u]) {
                if (depth[v] == -1) {
                    depth[v] = depth[u] + 1;
                    q.push_back(v);
                }
            }
        }
        return h;
    };

    // Candidate roots keep the tree binary: a node with 3 neighbors would
    // end up with 3 children when made the root, which no re-orientation of
    // the unchanged edge set can represent.
    int best_root = -1;
    int best_height = std::numeric_limits<int>::max();
    for (int r = 0; r < n; ++r) {
        if (adj[r].size() > 2) continue;
        const int h = rooted_height(r);
        if (h < best_height) {
            best_height = h;
            best_root = r;
        }
    }
    if (best_root < 0) throw std::runtime_error("rebalance: no binary-rootable node");

    // Re-orient from the chosen root; children ordered by node index,
    // single child in the right slot.
    VesselTree out;
    out.attrs = t.attrs;
    out.left.assign(n, -1);
    out.right.assign(n, -1);
    out.root = best_root;
    std::vector<char> seen(n, 0);
    seen[best_root] = 1;
    std::deque<int> q{best_root};
    while (!q.empty()) {
        const int u = q.front();
        q.pop_front();
        std::vector<int> kids;
        for (int v : adj[u]) {
            if (!seen[v]) kids.push_back(v);
        }
        std::sort(kids.begin(), kids.end());
        for (int v : kids) {
            seen[v] = 1;
            q.push_back(v);
        }
        if (kids.size() == 1) {
            out.right[u] = kids[0];
        } else if (kids.size() == 2) {
            out.left[u] = kids[0];
            out.right[u] = kids[1];
        } else if (kids.size() > 2) {
            throw std::runtime_error("rebalance: input was not binary");
        }
    }
    return out;
}

VesselTree trim(const VesselTree& t, int max_height) {
    if (max_height < 0) throw std::runtime_error("trim: max_height must be >= 0");
    const auto depth = node_depths(t);
    std::vector<char> keep(t.size(), 0);
    for (int i = 0; i < t.size(); ++i) keep[i] = depth[i] >= 0 && depth[i] <= max_height;

    Rebuild rb(t, keep);
    for (int i = 0; i < t.size(); ++i) {
        if (!keep[i]) continue;
        if (t.has_left(i) && keep[t.left[i]]) rb.link(i, t.left[i], true);
        if (t.has_right(i) && keep[t.right[i]]) rb.link(i, t.right[i], false);
    }
    return rb.out;
}

// Maximal paths whose endpoints are the root, bifurcations, or leaves and
// whose interior nodes have exactly one child. Returned as node-index lists
// from the upstream endpoint down.
static std::vector<std::vector<int>> tree_branches(const VesselTree& t) {
    std::vector<std::vector<int>> out;
    std::deque<int> heads{t.root};
    while (!heads.empty()) {
        const int head = heads.front();
        heads.pop_front();
        for (int c : {t.left[head], t.right[head]}) {
            if (c == -1) continue;
            std::vector<int> branch{head, c};
            int cur = c;
            while (t.degree(cur) == 1) {
                cur = t.right[cur];
                branch.push_back(cur);
            }
            out.push_back(std::move(branch));
            if (t.degree(cur) == 2) heads.push_back(cur);
        }
    }
    if (out.empty()) out.push_back({t.root});
    return out;
}

VesselTree resample_rdp(const VesselTree& t, double epsilon) {
    if (epsilon < 0.0) throw std::runtime_error("resample_rdp: epsilon must be >= 0");
    const auto branches = tree_branches(t);

    std::vector<char> keep(t.size(), 0);
    keep[t.root] = 1;
    for (const auto& branch : branches) {
        keep[branch.front()] = 1;
        keep[branch.back()] = 1;
        std::vector<NodeAttr> pts;
        pts.reserve(branch.size());
        for (int idx : branch) pts.push_back(t.attrs[idx]);
        std::vector<char> branch_keep(branch.size(), 0);
        branch_keep.front() = branch_keep.back() = 1;
        rdp_mark(pts, 0, static_cast<int>(branch.size()) - 1, epsilon, branch_keep);
        for (std::size_t i = 0; i < branch.size(); ++i) {
            if (branch_keep[i]) keep[branch[i]] = 1;
        }
    }

    Rebuild rb(t, keep);
    for (const auto& branch : branches) {
        if (branch.size() < 2) continue;
        // Link surviving nodes along the branch; interior links are
        // single-child and therefore go to the right slot.
        int prev = branch.front();
        for (std::size_t i = 1; i < branch.size(); ++i) {
            const int cur = branch[i];
            if (!keep[cur]) continue;
            if (prev == branch.front()) {
                const bool was_left = t.left[prev] == branch[1];
                // The first hop keeps the original slot at the branch head
                // (a bifurcation keeps two outgoing branches).
                const bool head_is_bif = t.degree(branch.front()) == 2;
                rb.link(prev, cur, head_is_bif && was_left);
            } else {
                rb.link(prev, cur, false);
            }
            prev = cur;
        }
    }
    return rb.out;
}

NormParams compute_norm_params(std::span<const VesselTree> trees) {
    if (trees.empty()) throw std::runtime_error("normalize: empty corpus");
    NormParams p;
    p.spatial_min = p.r_min = std::numeric_limits<double>::infinity();
    p.spatial_max = p.r_max = -std::numeric_limits<double>::infinity();
    for (const auto& t : trees) {
        for (const auto& a : t.attrs) {
            p.spatial_min = std::min({p.spatial_min, a.x, a.y, a.z});
            p.spatial_max = std::max({p.spatial_max, a.x, a.y, a.z});
            p.r_min = std::min(p.r_min, a.r);
            p.r_max = std::max(p.r_max, a.r);
        }
    }
    if (!(p.spatial_max > p.spatial_min)) throw std::runtime_error("normalize: degenerate spatial range");
    if (!(p.r_max > p.r_min)) throw std::runtime_error("normalize: degenerate radius range");
    return p;
}

VesselTree normalize(const VesselTree& t, const NormParams& p) {
    const double s = 1.0 / (p.spatial_max - p.spatial_min);
    const double sr = 1.0 / (p.r_max - p.r_min);
    VesselTree out = t;
    for (auto& a : out.attrs) {
        a.x = (a.x - p.spatial_min) * s;
        a.y = (a.y - p.spatial_min) * s;
        a.z = (a.z - p.spatial_min) * s;
        a.r = (a.r - p.r_min) * sr;
    }
    return out;
}

VesselTree denormalize(const VesselTree& t, const NormParams& p) {
    VesselTree out = t;
    for (auto& a : out.attrs) {
        a.x = a.x * (p.spatial_max - p.spatial_min) + p.spatial_min;
        a.y = a.y * (p.spatial_max - p.spatial_min) + p.spatial_min;
        a.z = a.z * (p.spatial_max - p.spatial_min) + p.spatial_min;
        a.r = a.r * (p.r_max - p.r_min) + p.r_min;
    }
    return out;
}

std::pair<std::vector<VesselTree>, NormParams> normalize_corpus(std::span<const VesselTree> trees) {
    const NormParams p = compute_norm_params(trees);
    std::vector<VesselTree> out;
    out.reserve(trees.size());
    for (const auto& t : trees) out.push_back(normalize(t, p));
    return {std::move(out), p};
}

TreeStats tree_stats(const VesselTree& t) {
    TreeStats s;
    s.node_count = t.size();
    for (int i = 0; i < t.size(); ++i) {
        if (t.degree(i) == 2) ++s.bifurcation_count;
    }
    s.height = tree_height(t);
    return s;
}

// Shared helper for metrics; declared here to keep branch semantics in one
// place. (metrics.cpp re-exports it.)
std::vector<std::vector<int>> branch_decomposition(const VesselTree& t) {
    return tree_branches(t);
}

} // namespace vesselgen
