#include "vesselgen/tree_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace vesselgen {

namespace {

std::vector<std::string> content_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        lines.push_back(line.substr(first, last - first + 1));
    }
    return lines;
}

double parse_number(const std::string& tok, const char* what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("malformed ") + what + ": '" + tok + "'");
    }
    if (pos != tok.size()) throw std::runtime_error(std::string("malformed ") + what + ": '" + tok + "'");
    return v;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream is(line);
    std::string t;
    while (is >> t) toks.push_back(t);
    return toks;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

void check_attr(const NodeAttr& a, bool allow_zero_radius) {
    if (!std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(a.z) || !std::isfinite(a.r))
        throw std::runtime_error("non-finite attribute");
    if (allow_zero_radius ? a.r < 0.0 : a.r <= 0.0)
        throw std::runtime_error("nonpositive radius");
}

struct ParsedDocument {
    std::vector<NodeAttr> attrs;
    std::map<long long, int> id_to_index;
    struct Edge {
        int parent;
        int child;
        char slot; // 'L', 'R', or '-'
    };
    std::vector<Edge> edges;
};

ParsedDocument parse_document(const std::string& text, bool allow_zero_radius) {
    const auto lines = content_lines(text);
    if (lines.empty()) throw std::runtime_error("empty document");
    {
        const auto toks = split_ws(lines[0]);
        if (toks.size() != 2 || toks[0] != "vesseltree")
            throw std::runtime_error("missing 'vesseltree <version>' header");
        if (toks[1] != "1") throw std::runtime_error("unsupported format version " + toks[1]);
    }
    std::size_t i = 1;
    if (i < lines.size() && split_ws(lines[i])[0] == "units") ++i;

    ParsedDocument doc;
    if (i >= lines.size()) throw std::runtime_error("missing node table");
    {
        const auto toks = split_ws(lines[i]);
        if (toks.size() != 2 || toks[0] != "nodes") throw std::runtime_error("missing 'nodes <n>' line");
        const int n = static_cast<int>(parse_number(toks[1], "node count"));
        ++i;
        for (int k = 0; k < n; ++k, ++i) {
            if (i >= lines.size()) throw std::runtime_error("truncated node table");
            const auto row = split_ws(lines[i]);
            if (row.size() != 5) throw std::runtime_error("node row needs 'id x y z r'");
            const long long id = static_cast<long long>(parse_number(row[0], "node id"));
            NodeAttr a{parse_number(row[1], "x"), parse_number(row[2], "y"),
                       parse_number(row[3], "z"), parse_number(row[4], "r")};
            check_attr(a, allow_zero_radius);
            if (!doc.id_to_index.emplace(id, static_cast<int>(doc.attrs.size())).second)
                throw std::runtime_error("duplicate node id " + std::to_string(id));
            doc.attrs.push_back(a);
        }
    }
    if (i >= lines.size()) throw std::runtime_error("missing edge table");
    {
        const auto toks = split_ws(lines[i]);
        if (toks.size() != 2 || toks[0] != "edges") throw std::runtime_error("missing 'edges <m>' line");
        const int m = static_cast<int>(parse_number(toks[1], "edge count"));
        ++i;
        for (int k = 0; k < m; ++k, ++i) {
            if (i >= lines.size()) throw std::runtime_error("truncated edge table");
            const auto row = split_ws(lines[i]);
            if (row.size() != 3) throw std::runtime_error("edge row needs 'parent child slot'");
            const long long pid = static_cast<long long>(parse_number(row[0], "parent id"));
            const long long cid = static_cast<long long>(parse_number(row[1], "child id"));
            const auto pit = doc.id_to_index.find(pid);
            const auto cit = doc.id_to_index.find(cid);
            if (pit == doc.id_to_index.end() || cit == doc.id_to_index.end())
                throw std::runtime_error("edge references unknown node id");
            if (row[2].size() != 1 || (row[2][0] != 'L' && row[2][0] != 'R' && row[2][0] != '-'))
                throw std::runtime_error("edge slot must be L, R, or -");
            doc.edges.push_back({pit->second, cit->second, row[2][0]});
        }
    }
    if (i != lines.size()) throw std::runtime_error("trailing content after edge table");
    return doc;
}

RawCenterlineGraph graph_from(const ParsedDocument& doc) {
    RawCenterlineGraph g;
    g.attrs = doc.attrs;
    g.adj.assign(g.attrs.size(), {});
    UnionFind uf(g.size());
    for (const auto& e : doc.edges) {
        if (e.parent == e.child || !uf.unite(e.parent, e.child))
            throw std::runtime_error("cycle detected");
        g.adj[e.parent].push_back(e.child);
        g.adj[e.child].push_back(e.parent);
    }
    for (int k = 1; k < g.size(); ++k) {
        if (uf.find(k) != uf.find(0)) throw std::runtime_error("disconnected graph");
    }
    return g;
}

} // namespace

RawCenterlineGraph parse_graph_document(const std::string& text) {
    return graph_from(parse_document(text, /*allow_zero_radius=*/false));
}

RawCenterlineGraph import_swc(const std::string& text) {
    RawCenterlineGraph g;
    std::map<long long, int> id_to_index;
    std::vector<std::pair<int, long long>> parent_refs;
    for (const auto& line : content_lines(text)) {
        const auto row = split_ws(line);
        if (row.size() != 7) throw std::runtime_error("SWC row needs 'id type x y z r parent'");
        const long long id = static_cast<long long>(parse_number(row[0], "node id"));
        NodeAttr a{parse_number(row[2], "x"), parse_number(row[3], "y"),
                   parse_number(row[4], "z"), parse_number(row[5], "r")};
        check_attr(a, false);
        const long long parent = static_cast<long long>(parse_number(row[6], "parent id"));
        if (!id_to_index.emplace(id, static_cast<int>(g.attrs.size())).second)
            throw std::runtime_error("duplicate node id " + std::to_string(id));
        g.attrs.push_back(a);
        parent_refs.emplace_back(static_cast<int>(g.attrs.size()) - 1, parent);
    }
    if (g.attrs.empty()) throw std::runtime_error("empty document");
    g.adj.assign(g.attrs.size(), {});
    UnionFind uf(g.size());
    for (const auto& [idx, parent] : parent_refs) {
        if (parent < 0) continue;
        const auto it = id_to_index.find(parent);
        if (it == id_to_index.end()) throw std::runtime_error("SWC parent id not found");
        if (it->second == idx || !uf.unite(it->second, idx))
            throw std::runtime_error("cycle detected");
        g.adj[it->second].push_back(idx);
        g.adj[idx].push_back(it->second);
    }
    for (int k = 1; k < g.size(); ++k) {
        if (uf.find(k) != uf.find(0)) throw std::runtime_error("disconnected graph");
    }
    return g;
}

VesselTree parse_tree_document(const std::string& text) {
    const auto doc = parse_document(text, /*allow_zero_radius=*/true);
    const int n = static_cast<int>(doc.attrs.size());
    VesselTree t;
    t.attrs = doc.attrs;
    t.left.assign(n, -1);
    t.right.assign(n, -1);
    std::vector<char> has_parent(n, 0);
    for (const auto& e : doc.edges) {
        if (e.slot == '-') throw std::runtime_error("'-' slot not allowed in a binary tree document");
        int& slot = (e.slot == 'L') ? t.left[e.parent] : t.right[e.parent];
        if (slot != -1) throw std::runtime_error("duplicate child slot");
        slot = e.child;
        has_parent[e.child] = 1;
    }
    t.root = -1;
    for (int k = 0; k < n; ++k) {
        if (!has_parent[k]) {
            if (t.root != -1) throw std::runtime_error("multiple roots");
            t.root = k;
        }
    }
    if (t.root == -1) throw std::runtime_error("cycle detected");
    validate(t);
    return t;
}

std::string format_tree_document(const VesselTree& t, const std::string& units) {
    std::string out;
    out += "vesseltree 1\n";
    out += "units " + units + "\n";
    out += "nodes " + std::to_string(t.size()) + "\n";
    char buf[160];
    for (int k = 0; k < t.size(); ++k) {
        const auto& a = t.attrs[k];
        std::snprintf(buf, sizeof buf, "%d %.17g %.17g %.17g %.17g\n", k, a.x, a.y, a.z, a.r);
        out += buf;
    }
    int m = 0;
    for (int k = 0; k < t.size(); ++k) m += t.degree(k);
    out += "edges " + std::to_string(m) + "\n";
    for (int k = 0; k < t.size(); ++k) {
        if (t.has_left(k)) {
            std::snprintf(buf, sizeof buf, "%d %d L\n", k, t.left[k]);
            out += buf;
        }
        if (t.has_right(k)) {
            std::snprintf(buf, sizeof buf, "%d %d R\n", k, t.right[k]);
            out += buf;
        }
    }
    return out;
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".vtree")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<CorpusEntry> out;
    for (const auto& f : files) {
        try {
            out.push_back({f.stem().string(), parse_tree_document(read_text_file(f))});
        } catch (const std::exception& e) {
            throw std::runtime_error(f.string() + ": " + e.what());
        }
    }
    if (out.empty()) throw std::runtime_error("no .vtree files in " + dir.string());
    return out;
}

void save_corpus(const std::filesystem::path& dir, const std::vector<CorpusEntry>& entries,
                 const std::string& units) {
    std::filesystem::create_directories(dir);
    for (const auto& e : entries) {
        write_text_file(dir / (e.name + ".vtree"), format_tree_document(e.tree, units));
    }
}

void save_norm_params(const std::filesystem::path& file, const NormParams& p) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "spatial_min %.17g\nspatial_max %.17g\nr_min %.17g\nr_max %.17g\n",
                  p.spatial_min, p.spatial_max, p.r_min, p.r_max);
    write_text_file(file, buf);
}

NormParams load_norm_params(const std::filesystem::path& file) {
    NormParams p;
    std::istringstream is(read_text_file(file));
    std::string key;
    double value;
    int seen = 0;
    while (is >> key >> value) {
        if (key == "spatial_min") p.spatial_min = value;
        else if (key == "spatial_max") p.spatial_max = value;
        else if (key == "r_min") p.r_min = value;
        else if (key == "r_max") p.r_max = value;
        else throw std::runtime_error("unknown key in norm params: " + key);
        ++seen;
    }
    if (seen != 4) throw std::runtime_error("norm params file must have 4 entries");
    return p;
}

std::string read_text_file(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + file.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& file, const std::string& text) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + file.string());
    os << text;
    if (!os) throw std::runtime_error("write failed: " + file.string());
}

std::string hash_file(const std::filesystem::path& file) {
    const std::string data = read_text_file(file);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace vesselgen
