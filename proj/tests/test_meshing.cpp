#include "vesselgen/meshing.hpp"

#include "vesselgen/tree_io.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

using namespace vesselgen;

namespace {

VesselTree segment_tree(double len = 1.0, double r = 0.25) {
    VesselTree t;
    t.attrs = {{0, 0, 0, r}, {len, 0, 0, r}};
    t.left = {-1, -1};
    t.right = {1, -1};
    t.root = 0;
    return t;
}

ScalarGrid analytic_sphere_grid(double R, double voxel, double extent) {
    ScalarGrid grid;
    grid.voxel = voxel;
    const int n = static_cast<int>(std::ceil(2 * extent / voxel)) + 1;
    grid.dims = {n, n, n};
    grid.origin = {-extent, -extent, -extent};
    grid.values.resize(static_cast<std::size_t>(n) * n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const auto p = grid.position(i, j, k);
                grid.values[(static_cast<std::size_t>(i) * n + j) * n + k] =
                    p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - R * R;
            }
    return grid;
}

// Every undirected edge must belong to exactly two triangles.
bool watertight(const TriMesh& mesh) {
    std::map<std::pair<int, int>, int> edges;
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            const int a = t[e], b = t[(e + 1) % 3];
            ++edges[{std::min(a, b), std::max(a, b)}];
        }
    }
    for (const auto& [edge, count] : edges) {
        if (count != 2) return false;
    }
    return !edges.empty();
}

double capsule_field(const std::array<double, 3>& p, double len, double r) {
    const double d = oracles::point_segment_dist(p, {0, 0, 0}, {len, 0, 0});
    return d * d - r * r;
}

} // namespace

TEST_CASE("densify_centerline spacing, interpolation, and edge cases") {
    const VesselTree t = segment_tree(1.0, 0.25);
    const auto s = densify_centerline(t, 0.25);
    CHECK(s.size() >= 5); // both endpoints plus 3 interior samples
    for (const auto& a : s) {
        CHECK(a.x >= 0.0);
        CHECK(a.x <= 1.0);
        CHECK(a.y == 0.0);
    }

    // Linear radius interpolation: midpoint of a 1 -> 0 taper is 0.5.
    VesselTree taper = segment_tree(1.0, 1.0);
    taper.attrs[1].r = 0.0;
    const auto ts = densify_centerline(taper, 0.5);
    bool found_mid = false;
    for (const auto& a : ts) {
        if (std::abs(a.x - 0.5) < 1e-12) {
            CHECK(a.r == doctest::Approx(0.5));
            found_mid = true;
        }
    }
    CHECK(found_mid);

    // step >= segment length: endpoints only.
    CHECK(densify_centerline(t, 2.0).size() == 2);

    VesselTree single;
    single.attrs = {{0, 0, 0, 1}};
    single.left = {-1};
    single.right = {-1};
    single.root = 0;
    CHECK_THROWS(densify_centerline(single, 0.5));
    CHECK_THROWS(densify_centerline(t, 0.0));
}

TEST_CASE("sdf_grid holds min(|v-c|^2 - r^2) with aligned spot values") {
    // Samples on the x axis; the grid aligns so lattice points land exactly
    // on centerline samples (max_r + padding is a multiple of the voxel).
    const VesselTree t = segment_tree(1.0, 0.25);
    const double voxel = 0.05;
    const auto samples = densify_centerline(t, voxel / 2.0);
    const ScalarGrid grid = sdf_grid(samples, voxel, 0.3); // expand = 0.55 = 11 voxels

    const int i0 = static_cast<int>(std::round((0.0 - grid.origin[0]) / voxel));
    const int j0 = static_cast<int>(std::round((0.0 - grid.origin[1]) / voxel));
    const int k0 = static_cast<int>(std::round((0.0 - grid.origin[2]) / voxel));
    CHECK(std::abs(grid.position(i0, j0, k0)[0]) < 1e-12);

    // On-axis voxel at a sample: exactly -r^2.
    CHECK(grid.value(i0, j0, k0) == doctest::Approx(-0.0625).epsilon(1e-9));

    // Voxel at distance exactly r from the axis: 0 within (step/2)^2.
    const double step = voxel / 2.0;
    CHECK(std::abs(grid.value(i0, j0 + 5, k0)) <= step * step / 4.0 + 1e-12);

    // Voxel at distance 0.5 from the segment: 0.25 - 0.0625 = 0.1875.
    CHECK(grid.value(i0, j0 + 10, k0) == doctest::Approx(0.1875).epsilon(1e-9));

    // Spot-check voxels against a brute-force reference over the samples.
    for (int i = 0; i < grid.dims[0]; i += 7) {
        for (int j = 0; j < grid.dims[1]; j += 5) {
            for (int k = 0; k < grid.dims[2]; k += 3) {
                const auto p = grid.position(i, j, k);
                double best = 1e300;
                for (const auto& c : samples) {
                    const double dx = p[0] - c.x, dy = p[1] - c.y, dz = p[2] - c.z;
                    best = std::min(best, dx * dx + dy * dy + dz * dz - c.r * c.r);
                }
                CHECK(grid.value(i, j, k) == doctest::Approx(best).epsilon(1e-12));
            }
        }
    }

    CHECK_THROWS(sdf_grid({}, 0.05, 0.1));
    CHECK_THROWS(sdf_grid(samples, 0.0, 0.1));
}

TEST_CASE("marching_cubes on an all-positive grid is empty") {
    ScalarGrid grid;
    grid.voxel = 1.0;
    grid.dims = {3, 3, 3};
    grid.origin = {0, 0, 0};
    grid.values.assign(27, 5.0);
    const TriMesh mesh = marching_cubes(grid);
    CHECK(mesh.vertices.empty());
    CHECK(mesh.triangles.empty());
}

TEST_CASE("marching_cubes sphere oracle: accuracy, watertightness, winding") {
    const double R = 0.4, voxel = 0.05;
    const TriMesh mesh = marching_cubes(analytic_sphere_grid(R, voxel, 1.0));
    REQUIRE(!mesh.vertices.empty());

    for (const auto& v : mesh.vertices) {
        const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        CHECK(std::abs(r - R) <= 1.5 * voxel);
    }
    CHECK(watertight(mesh));

    // No degenerate triangles; normals face the positive side of the field.
    for (const auto& t : mesh.triangles) {
        CHECK(t[0] != t[1]);
        CHECK(t[1] != t[2]);
        CHECK(t[0] != t[2]);
        const auto &a = mesh.vertices[t[0]], &b = mesh.vertices[t[1]], &c = mesh.vertices[t[2]];
        const double u[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
        const double w[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
        const double n[3] = {u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2],
                             u[0] * w[1] - u[1] * w[0]};
        const double area2 = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
        CHECK(area2 > 0.0);
        const double cen[3] = {(a[0] + b[0] + c[0]) / 3, (a[1] + b[1] + c[1]) / 3,
                               (a[2] + b[2] + c[2]) / 3};
        CHECK(n[0] * cen[0] + n[1] * cen[1] + n[2] * cen[2] > 0.0);
    }
}

TEST_CASE("straight segment meshes to a watertight capsule near the true surface") {
    const double r = 0.25;
    const VesselTree t = segment_tree(1.0, r);

    auto run = [&](double voxel) {
        const auto samples = densify_centerline(t, voxel / 2.0);
        const auto grid = sdf_grid(samples, voxel, 2 * voxel);
        const TriMesh mesh = marching_cubes(grid);
        REQUIRE(!mesh.triangles.empty());
        CHECK(watertight(mesh));
        double worst = 0.0;
        for (const auto& v : mesh.vertices) {
            const double f = capsule_field(v, 1.0, r);
            // |d^2 - r^2| / (2r) approximates |d - r| near the surface.
            worst = std::max(worst, std::abs(f) / (2 * r));
        }
        CHECK(worst <= 1.5 * voxel);
        return worst;
    };
    const double coarse = run(0.05);
    const double fine = run(0.025);
    CHECK(fine < coarse); // doubling resolution tightens the surface
}

TEST_CASE("obj export format and round trip") {
    TriMesh one;
    one.vertices = {{0.123456789, 1.5, -2.25}, {1, 0, 0}, {0, 1, 0}};
    one.triangles = {{0, 1, 2}};
    const std::string obj = format_obj(one);
    int vlines = 0, flines = 0;
    std::istringstream is(obj);
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("v ", 0) == 0) ++vlines;
        if (line.rfind("f ", 0) == 0) ++flines;
    }
    CHECK(vlines == 3);
    CHECK(flines == 1);

    const TriMesh back = parse_obj(obj);
    REQUIRE(back.vertices.size() == 3);
    REQUIRE(back.triangles.size() == 1);
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            CHECK(std::abs(back.vertices[i][k] - one.vertices[i][k]) < 1e-6);
    CHECK(back.triangles[0] == std::array<int, 3>{0, 1, 2});

    const TriMesh empty;
    const std::string eobj = format_obj(empty);
    CHECK(eobj.rfind("#", 0) == 0); // comment header only
    CHECK(parse_obj(eobj).vertices.empty());

    const auto path = std::filesystem::temp_directory_path() / "vesselgen_mesh_test.obj";
    export_obj(one, path);
    CHECK(read_text_file(path) == obj);
    std::filesystem::remove(path);
}

TEST_CASE("mesh_tree produces a closed surface for a small branched tree") {
    VesselTree t;
    t.attrs = {{0, 0, 0, 0.3}, {1, 0, 0, 0.25}, {1.8, 0.6, 0, 0.2}, {1.8, -0.6, 0, 0.2}};
    t.left = {-1, 2, -1, -1};
    t.right = {1, 3, -1, -1};
    t.root = 0;
    MeshingOptions opt;
    opt.resolution = 48;
    const TriMesh mesh = mesh_tree(t, opt);
    CHECK(!mesh.triangles.empty());
    CHECK(watertight(mesh));
}
