#include "vesselgen/tree_io.hpp"

#include <doctest.h>

#include <filesystem>

using namespace vesselgen;

TEST_CASE("parse_graph_document reads a minimal two-node document") {
    const std::string doc =
        "vesseltree 1\n"
        "units mm\n"
        "nodes 2\n"
        "0 0 0 0 1\n"
        "1 1 0 0 1\n"
        "edges 1\n"
        "0 1 -\n";
    const RawCenterlineGraph g = parse_graph_document(doc);
    CHECK(g.size() == 2);
    CHECK(g.adj[0].size() == 1);
    CHECK(g.adj[1].size() == 1);
}

TEST_CASE("parse_graph_document rejects a triangle as a cycle") {
    const std::string doc =
        "vesseltree 1\n"
        "nodes 3\n"
        "0 0 0 0 1\n"
        "1 1 0 0 1\n"
        "2 2 0 0 1\n"
        "edges 3\n"
        "0 1 -\n"
        "1 2 -\n"
        "2 0 -\n";
    CHECK_THROWS_WITH_AS(parse_graph_document(doc), "cycle detected", std::runtime_error);
}

TEST_CASE("parse_graph_document rejects nonpositive radius") {
    const std::string doc =
        "vesseltree 1\n"
        "nodes 1\n"
        "0 0 0 0 -0.5\n"
        "edges 0\n";
    CHECK_THROWS_WITH_AS(parse_graph_document(doc), "nonpositive radius", std::runtime_error);
}

TEST_CASE("parse_graph_document rejects malformed content") {
    CHECK_THROWS(parse_graph_document("not a tree\n"));
    CHECK_THROWS(parse_graph_document("vesseltree 2\nnodes 0\nedges 0\n"));
    CHECK_THROWS(parse_graph_document("vesseltree 1\nnodes 1\n0 0 0 0\nedges 0\n"));
    CHECK_THROWS(parse_graph_document("vesseltree 1\nnodes 1\n0 0 0 0 nan\nedges 0\n"));
    CHECK_THROWS(parse_graph_document(
        "vesseltree 1\nnodes 2\n0 0 0 0 1\n1 1 0 0 1\nedges 1\n0 5 -\n"));
}

TEST_CASE("tree documents round-trip through format and parse") {
    VesselTree t;
    t.attrs = {{0.25, 0.5, 0.125, 0.7}, {1.0 / 3.0, 0.2, 0.9, 0.45}, {0.1, 0.2, 0.3, 0.4}};
    t.left = {1, -1, -1};
    t.right = {2, -1, -1};
    t.root = 0;
    const std::string doc = format_tree_document(t, "normalized");
    const VesselTree back = parse_tree_document(doc);
    REQUIRE(back.size() == 3);
    CHECK(back.root == 0);
    CHECK(back.left[0] == 1);
    CHECK(back.right[0] == 2);
    for (int i = 0; i < 3; ++i) {
        CHECK(back.attrs[i].x == t.attrs[i].x);
        CHECK(back.attrs[i].y == t.attrs[i].y);
        CHECK(back.attrs[i].z == t.attrs[i].z);
        CHECK(back.attrs[i].r == t.attrs[i].r);
    }
    // Identical bytes when re-serialized.
    CHECK(format_tree_document(back, "normalized") == doc);
}

TEST_CASE("parse_tree_document rejects '-' slots and slot conflicts") {
    CHECK_THROWS(parse_tree_document(
        "vesseltree 1\nnodes 2\n0 0 0 0 1\n1 1 0 0 1\nedges 1\n0 1 -\n"));
    CHECK_THROWS(parse_tree_document(
        "vesseltree 1\nnodes 3\n0 0 0 0 1\n1 1 0 0 1\n2 2 0 0 1\nedges 2\n0 1 R\n0 2 R\n"));
    // Single child in the left slot violates the tree invariant.
    CHECK_THROWS(parse_tree_document(
        "vesseltree 1\nnodes 2\n0 0 0 0 1\n1 1 0 0 1\nedges 1\n0 1 L\n"));
}

TEST_CASE("import_swc builds the same graph as the native format") {
    const std::string swc =
        "# comment line\n"
        "1 2 0 0 0 1.0 -1\n"
        "2 2 1 0 0 0.8 1\n"
        "3 2 2 0 0 0.6 2\n"
        "4 2 1 1 0 0.5 2\n";
    const RawCenterlineGraph g = import_swc(swc);
    CHECK(g.size() == 4);
    CHECK(g.adj[1].size() == 3); // node id 2: parent 1 plus children 3,4
    CHECK(g.attrs[0].r == 1.0);
}

TEST_CASE("corpus directories round-trip") {
    const auto dir = std::filesystem::temp_directory_path() / "vesselgen_test_corpus";
    std::filesystem::remove_all(dir);

    VesselTree t;
    t.attrs = {{0, 0, 0, 1}, {1, 0, 0, 0.5}};
    t.left = {-1, -1};
    t.right = {1, -1};
    t.root = 0;
    save_corpus(dir, {{"b_tree", t}, {"a_tree", t}}, "raw");
    const auto loaded = load_corpus(dir);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].name == "a_tree"); // sorted by filename
    CHECK(loaded[1].name == "b_tree");
    CHECK(loaded[0].tree.size() == 2);

    NormParams p{-3.5, 12.25, 0.125, 4.75};
    save_norm_params(dir / "norm.txt", p);
    const NormParams q = load_norm_params(dir / "norm.txt");
    CHECK(q.spatial_min == p.spatial_min);
    CHECK(q.spatial_max == p.spatial_max);
    CHECK(q.r_min == p.r_min);
    CHECK(q.r_max == p.r_max);

    std::filesystem::remove_all(dir);
}
