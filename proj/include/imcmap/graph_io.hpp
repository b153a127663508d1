#pragma once

#include <filesystem>
#include <string>

#include "imcmap/cost.hpp"
#include "imcmap/graph.hpp"

namespace imcmap {

struct LoadedGraph {
  ModelGraph graph;
  CostOverrides cost;  // optional "cost" header object, empty fields otherwise
};

/// Parse a graph document. Unknown fields anywhere are rejected.
/// Node fields macs / out_elems / weight_count default to 0 / 1 / 0.
LoadedGraph parse_graph_json(const std::string& text, const std::string& origin = "<string>");

LoadedGraph load_graph(const std::filesystem::path& path);

/// Canonical serialized form (stable field order, nodes by ascending id,
/// edges sorted). Byte-identical for equal graphs.
std::string graph_to_json_string(const ModelGraph& g);

}  // namespace imcmap
