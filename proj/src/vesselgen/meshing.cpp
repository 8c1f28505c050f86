#include "vesselgen/meshing.hpp"

#include "vesselgen/mc_tables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace vesselgen {

std::vector<NodeAttr> densify_centerline(const VesselTree& t, double step) {
    if (step <= 0.0) throw std::runtime_error("densify_centerline: step must be > 0");
    if (t.size() < 2) throw std::runtime_error("densify_centerline: tree must have >= 2 nodes");

    std::vector<NodeAttr> samples = t.attrs;
    for (int p = 0; p < t.size(); ++p) {
        for (int c : {t.left[p], t.right[p]}) {
            if (c == -1) continue;
            const NodeAttr& a = t.attrs[p];
            const NodeAttr& b = t.attrs[c];
            const double len = std::sqrt((b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y) +
                                         (b.z - a.z) * (b.z - a.z));
            const int segs = std::max(1, static_cast<int>(std::ceil(len / step)));
            for (int i = 1; i < segs; ++i) {
                const double u = static_cast<double>(i) / segs;
                samples.push_back({a.x + u * (b.x - a.x), a.y + u * (b.y - a.y),
                                   a.z + u * (b.z - a.z), a.r + u * (b.r - a.r)});
            }
        }
    }
    return samples;
}

ScalarGrid sdf_grid(std::span<const NodeAttr> samples, double voxel_size, double padding) {
    if (samples.empty()) throw std::runtime_error("sdf_grid: no samples");
    if (voxel_size <= 0.0) throw std::runtime_error("sdf_grid: voxel_size must be > 0");

    double lo[3] = {samples[0].x, samples[0].y, samples[0].z};
    double hi[3] = {samples[0].x, samples[0].y, samples[0].z};
    double max_r = 0.0;
    for (const auto& s : samples) {
        lo[0] = std::min(lo[0], s.x);
        lo[1] = std::min(lo[1], s.y);
        lo[2] = std::min(lo[2], s.z);
        hi[0] = std::max(hi[0], s.x);
        hi[1] = std::max(hi[1], s.y);
        hi[2] = std::max(hi[2], s.z);
        max_r = std::max(max_r, s.r);
    }
    const double expand = max_r + padding;

    ScalarGrid grid;
    grid.voxel = voxel_size;
    for (int a = 0; a < 3; ++a) {
        grid.origin[a] = lo[a] - expand;
        grid.dims[a] =
            std::max(2, static_cast<int>(std::ceil((hi[a] + expand - grid.origin[a]) / voxel_size)) + 1);
    }
    grid.values.assign(static_cast<std::size_t>(grid.dims[0]) * grid.dims[1] * grid.dims[2], 0.0);

    // Flatten samples for the hot loop.
    struct S {
        double x, y, z, r2;
    };
    std::vector<S> flat;
    flat.reserve(samples.size());
    for (const auto& s : samples) flat.push_back({s.x, s.y, s.z, s.r * s.r});

    std::size_t idx = 0;
    for (int i = 0; i < grid.dims[0]; ++i) {
        const double x = grid.origin[0] + voxel_size * i;
        for (int j = 0; j < grid.dims[1]; ++j) {
            const double y = grid.origin[1] + voxel_size * j;
            for (int k = 0; k < grid.dims[2]; ++k, ++idx) {
                const double z = grid.origin[2] + voxel_size * k;
                double best = std::numeric_limits<double>::infinity();
                for (const auto& s : flat) {
                    const double dx = x - s.x, dy = y - s.y, dz = z - s.z;
                    const double v = dx * dx + dy * dy + dz * dz - s.r2;
                    best = std::min(best, v);
                }
                grid.values[idx] = best;
            }
        }
    }
    return grid;
}

TriMesh marching_cubes(const ScalarGrid& grid, double iso) {
    for (int a = 0; a < 3; ++a) {
        if (grid.dims[a] < 2) throw std::runtime_error("marching_cubes: grid dims must be >= 2");
    }
    TriMesh mesh;

    // Grid values exactly at iso are nudged off it so every crossing is
    // strict; interpolation then never lands on a cube corner and welded
    // vertices cannot collapse triangles.
    const double nudge = (std::abs(iso) + 1.0) * 1e-12;
    auto sample = [&](int i, int j, int k) {
        const double v = grid.value(i, j, k);
        return v == iso ? iso + nudge : v;
    };

    // Vertices are welded by global grid-edge key: (lattice point, axis).
    std::map<long long, int> edge_vertex;
    const long long ny = grid.dims[1], nz = grid.dims[2];
    auto edge_key = [&](int i, int j, int k, int axis) {
        return ((static_cast<long long>(i) * ny + j) * nz + k) * 3 + axis;
    };

    double corner_val[8];
    int corner_idx[8][3];
    int edge_vert_idx[12];

    for (int i = 0; i + 1 < grid.dims[0]; ++i) {
        for (int j = 0; j + 1 < grid.dims[1]; ++j) {
            for (int k = 0; k + 1 < grid.dims[2]; ++k) {
                int cube = 0;
                for (int c = 0; c < 8; ++c) {
                    corner_idx[c][0] = i + mc::corner_offset[c][0];
                    corner_idx[c][1] = j + mc::corner_offset[c][1];
                    corner_idx[c][2] = k + mc::corner_offset[c][2];
                    corner_val[c] = sample(corner_idx[c][0], corner_idx[c][1], corner_idx[c][2]);
                    if (corner_val[c] < iso) cube |= 1 << c;
                }
                const int edges = mc::edge_table[cube];
                if (edges == 0) continue;

                for (int e = 0; e < 12; ++e) {
                    if (!(edges & (1 << e))) continue;
                    const int ca = mc::edge_corners[e][0];
                    const int cb = mc::edge_corners[e][1];
                    // Canonical key from the lower corner along the axis.
                    int axis = 0;
                    for (int a = 0; a < 3; ++a) {
                        if (corner_idx[ca][a] != corner_idx[cb][a]) axis = a;
                    }
                    const int lo = corner_idx[ca][axis] < corner_idx[cb][axis] ? ca : cb;
                    const long long key =
                        edge_key(corner_idx[lo][0], corner_idx[lo][1], corner_idx[lo][2], axis);
                    auto it = edge_vertex.find(key);
                    if (it == edge_vertex.end()) {
                        const double va = corner_val[ca];
                        const double vb = corner_val[cb];
                        const double t = (iso - va) / (vb - va);
                        const auto pa =
                            grid.position(corner_idx[ca][0], corner_idx[ca][1], corner_idx[ca][2]);
                        const auto pb =
                            grid.position(corner_idx[cb][0], corner_idx[cb][1], corner_idx[cb][2]);
                        mesh.vertices.push_back({pa[0] + t * (pb[0] - pa[0]),
                                                 pa[1] + t * (pb[1] - pa[1]),
                                                 pa[2] + t * (pb[2] - pa[2])});
                        it = edge_vertex.emplace(key, static_cast<int>(mesh.vertices.size()) - 1)
                                 .first;
                    }
                    edge_vert_idx[e] = it->second;
                }

                for (int tri = 0; mc::tri_table[cube][tri] != -1; tri += 3) {
                    const int a = edge_vert_idx[mc::tri_table[cube][tri]];
                    const int b = edge_vert_idx[mc::tri_table[cube][tri + 1]];
                    const int c = edge_vert_idx[mc::tri_table[cube][tri + 2]];
                    if (a == b || b == c || a == c) continue;
                    mesh.triangles.push_back({a, b, c});
                }
            }
        }
    }
    return mesh;
}

std::string format_obj(const TriMesh& mesh) {
    std::string out = "# vesselgen surface mesh\n";
    char buf[160];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", v[0], v[1], v[2]);
        out += buf;
    }
    for (const auto& t : mesh.triangles) {
        std::snprintf(buf, sizeof buf, "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
        out += buf;
    }
    return out;
}

void export_obj(const TriMesh& mesh, const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + path.string());
    const std::string text = format_obj(mesh);
    const std::size_t written = std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
    if (written != text.size()) throw std::runtime_error("write failed: " + path.string());
}

TriMesh parse_obj(const std::string& text) {
    TriMesh mesh;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            std::array<double, 3> v{};
            if (!(ls >> v[0] >> v[1] >> v[2])) throw std::runtime_error("bad OBJ vertex line");
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::array<int, 3> t{};
            if (!(ls >> t[0] >> t[1] >> t[2])) throw std::runtime_error("bad OBJ face line");
            mesh.triangles.push_back({t[0] - 1, t[1] - 1, t[2] - 1});
        }
    }
    return mesh;
}

void export_grid(const ScalarGrid& grid, const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + path.string());
    std::fprintf(f, "vesselgrid 1\norigin %.17g %.17g %.17g\nvoxel %.17g\ndims %d %d %d\n",
                 grid.origin[0], grid.origin[1], grid.origin[2], grid.voxel, grid.dims[0],
                 grid.dims[1], grid.dims[2]);
    for (double v : grid.values) std::fprintf(f, "%.17g\n", v);
    std::fclose(f);
}

TriMesh mesh_tree(const VesselTree& t, const MeshingOptions& opt) {
    if (opt.resolution < 2) throw std::runtime_error("mesh_tree: resolution must be >= 2");
    double lo[3] = {t.attrs[0].x, t.attrs[0].y, t.attrs[0].z};
    double hi[3] = {t.attrs[0].x, t.attrs[0].y, t.attrs[0].z};
    for (const auto& a : t.attrs) {
        lo[0] = std::min(lo[0], a.x);
        lo[1] = std::min(lo[1], a.y);
        lo[2] = std::min(lo[2], a.z);
        hi[0] = std::max(hi[0], a.x);
        hi[1] = std::max(hi[1], a.y);
        hi[2] = std::max(hi[2], a.z);
    }
    const double longest = std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]});
    if (longest <= 0.0) throw std::runtime_error("mesh_tree: degenerate bounding box");
    const double voxel = longest / opt.resolution;
    const auto samples = densify_centerline(t, voxel / 2.0);
    const auto grid = sdf_grid(samples, voxel, opt.padding_voxels * voxel);
    return marching_cubes(grid, 0.0);
}

} // namespace vesselgen
