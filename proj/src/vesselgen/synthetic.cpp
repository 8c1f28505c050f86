#include "vesselgen/synthetic.hpp"

#include "vesselgen/rng.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace vesselgen {

namespace {

using Vec3 = std::array<double, 3>;

Vec3 normalized(const Vec3& v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n == 0.0) return {0.0, 0.0, 1.0};
    return {v[0] / n, v[1] / n, v[2] / n};
}

Vec3 random_unit(Rng& rng) {
    // Rejection sample inside the unit ball, then normalize.
    for (;;) {
        Vec3 v{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const double n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if (n2 > 1e-6 && n2 <= 1.0) return normalized(v);
    }
}

// Unit vector orthogonal to d, at a random azimuth around it.
Vec3 random_orthogonal(const Vec3& d, Rng& rng) {
    const Vec3 any = std::fabs(d[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const Vec3 u = normalized({d[1] * any[2] - d[2] * any[1],
                               d[2] * any[0] - d[0] * any[2],
                               d[0] * any[1] - d[1] * any[0]});
    const Vec3 w{d[1] * u[2] - d[2] * u[1],
                 d[2] * u[0] - d[0] * u[2],
                 d[0] * u[1] - d[1] * u[0]};
    const double phi = rng.uniform(0.0, 6.283185307179586);
    const double c = std::cos(phi), s = std::sin(phi);
    return {c * u[0] + s * w[0], c * u[1] + s * w[1], c * u[2] + s * w[2]};
}

struct Grower {
    const BranchingParams& p;
    Rng& rng;
    VesselTree tree;

    int add_node(const Vec3& pos, double radius) {
        tree.attrs.push_back({pos[0], pos[1], pos[2], radius});
        tree.left.push_back(-1);
        tree.right.push_back(-1);
        return tree.size() - 1;
    }

    Vec3 jittered(const Vec3& dir, const Vec3& lateral, double lateral_scale) {
        Vec3 v{dir[0] + lateral_scale * lateral[0] + p.jitter * rng.normal(),
               dir[1] + lateral_scale * lateral[1] + p.jitter * rng.normal(),
               dir[2] + lateral_scale * lateral[2] + p.jitter * rng.normal()};
        return normalized(v);
    }

    void grow(int node, const Vec3& dir, int depth) {
        if (depth >= p.max_height) return;
        const Vec3 pos{tree.attrs[node].x, tree.attrs[node].y, tree.attrs[node].z};
        const double child_r = tree.attrs[node].r * p.radius_decay;
        const bool bifurcate = rng.uniform() < p.branch_prob;
        if (bifurcate) {
            const Vec3 lat = random_orthogonal(dir, rng);
            for (int side = 0; side < 2; ++side) {
                const Vec3 d = jittered(dir, lat, side == 0 ? p.spread : -p.spread);
                const double step = rng.uniform(p.step_min, p.step_max);
                const Vec3 cpos{pos[0] + step * d[0], pos[1] + step * d[1], pos[2] + step * d[2]};
                const int child = add_node(cpos, child_r);
                (side == 0 ? tree.left[node] : tree.right[node]) = child;
                grow(child, d, depth + 1);
            }
        } else {
            const Vec3 d = jittered(dir, {0, 0, 0}, 0.0);
            const double step = rng.uniform(p.step_min, p.step_max);
            const Vec3 cpos{pos[0] + step * d[0], pos[1] + step * d[1], pos[2] + step * d[2]};
            const int child = add_node(cpos, child_r);
            tree.right[node] = child;
            grow(child, d, depth + 1);
        }
    }
};

} // namespace

std::vector<VesselTree> generate_synthetic_corpus(int n, std::uint64_t seed,
                                                  const BranchingParams& params) {
    if (n <= 0) throw std::runtime_error("generate_synthetic_corpus: n must be > 0");
    std::vector<VesselTree> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        Grower g{params, rng, {}};
        const double root_r = rng.uniform(params.root_radius_min, params.root_radius_max);
        const int root = g.add_node({0.0, 0.0, 0.0}, root_r);
        g.tree.root = root;
        g.grow(root, random_unit(rng), 0);
        validate(g.tree);
        out.push_back(std::move(g.tree));
    }
    return out;
}

} // namespace vesselgen
