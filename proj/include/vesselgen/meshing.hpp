#pragma once

#include "vesselgen/tree.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace vesselgen {

// Regular lattice of field samples. Note the field stored here is the
// squared-distance form min_c(|v - c|^2 - r(c)^2): values are in squared
// length units, not distances; the zero level set is still the surface
// where distance equals radius.
struct ScalarGrid {
    std::array<double, 3> origin{};
    double voxel = 1.0;
    std::array<int, 3> dims{}; // lattice points per axis, >= 2
    std::vector<double> values;

    double value(int i, int j, int k) const {
        return values[(static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k];
    }
    std::array<double, 3> position(int i, int j, int k) const {
        return {origin[0] + voxel * i, origin[1] + voxel * j, origin[2] + voxel * k};
    }
};

struct TriMesh {
    std::vector<std::array<double, 3>> vertices;
    std::vector<std::array<int, 3>> triangles;
};

// Samples every parent->child segment at spacing <= step with linear
// interpolation of position and radius; original nodes are included once.
// A single-node tree has no segments and is rejected.
std::vector<NodeAttr> densify_centerline(const VesselTree& t, double step);

// Fills a lattice covering the sample bounding box expanded by
// (max radius + padding) with min_c(|v - c|^2 - r(c)^2).
ScalarGrid sdf_grid(std::span<const NodeAttr> samples, double voxel_size, double padding);

// Standard 256-case marching cubes with linear edge interpolation and
// welded vertices; consistent winding with outward normals toward the
// positive side of the field.
TriMesh marching_cubes(const ScalarGrid& grid, double iso = 0.0);

// Wavefront OBJ (v/f records, 1-based indices).
std::string format_obj(const TriMesh& mesh);
void export_obj(const TriMesh& mesh, const std::filesystem::path& path);
TriMesh parse_obj(const std::string& text);

// Debug dump of the raw field (header + values).
void export_grid(const ScalarGrid& grid, const std::filesystem::path& path);

struct MeshingOptions {
    int resolution = 128;      // lattice points along the longest bbox edge
    double padding_voxels = 2; // extra margin beyond the max radius
};

// densify + sdf_grid + marching_cubes with the default sizing rules
// (sampling step = voxel/2, padding = padding_voxels * voxel + handled max radius).
TriMesh mesh_tree(const VesselTree& t, const MeshingOptions& opt = {});

} // namespace vesselgen
