#pragma once

#include "vesselgen/tree.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace vesselgen {

// Tree document format, one tree per file:
//
//   vesseltree 1
//   units mm
//   nodes <n>
//   <id> <x> <y> <z> <r>     (n rows)
//   edges <m>
//   <parent> <child> <slot>  (m rows, slot in {L, R, -})
//
// '#' starts a comment; ids are arbitrary but unique. The '-' slot is only
// allowed in raw (pre-binarization) documents. SWC rows
// (`id type x y z r parent`) are accepted as an import path.

// Parses a raw centerline document (or SWC text) into an undirected graph.
// Rejects cycles, duplicate ids, non-finite attributes, and r <= 0.
RawCenterlineGraph parse_graph_document(const std::string& text);
RawCenterlineGraph import_swc(const std::string& text);

// Parses a processed (binary, slotted) tree document.
VesselTree parse_tree_document(const std::string& text);
std::string format_tree_document(const VesselTree& t, const std::string& units);

struct CorpusEntry {
    std::string name;
    VesselTree tree;
};

// Loads every .vtree file in the directory (sorted by filename).
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir);
void save_corpus(const std::filesystem::path& dir, const std::vector<CorpusEntry>& entries,
                 const std::string& units);

void save_norm_params(const std::filesystem::path& file, const NormParams& p);
NormParams load_norm_params(const std::filesystem::path& file);

std::string read_text_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, const std::string& text);

// FNV-1a over the file bytes, hex-encoded; used in run manifests.
std::string hash_file(const std::filesystem::path& file);

} // namespace vesselgen
