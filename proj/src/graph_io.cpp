#include "imcmap/graph_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "imcmap/error.hpp"

namespace imcmap {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where, const std::string& origin) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ParseError(origin + ": unknown field '" + it.key() + "' in " + where);
}

std::int64_t require_count(const json& v, const std::string& field, const std::string& origin) {
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0))
    throw ParseError(origin + ": field '" + field + "' must be a non-negative integer");
  return v.get<std::int64_t>();
}

double require_number(const json& v, const std::string& field, const std::string& origin) {
  if (!v.is_number())
    throw ParseError(origin + ": field '" + field + "' must be a number");
  return v.get<double>();
}

NodeSpec parse_node(const json& jn, const std::string& origin) {
  if (!jn.is_object()) throw ParseError(origin + ": every node must be an object");
  reject_unknown_keys(
      jn, {"id", "name", "op", "fused_activation", "macs", "out_elems", "weight_count", "time"},
      "node", origin);
  for (const char* field : {"id", "name", "op"})
    if (!jn.contains(field))
      throw ParseError(origin + ": node is missing required field '" + std::string(field) + "'");

  NodeSpec n;
  if (!jn["id"].is_number_integer() || jn["id"].get<std::int64_t>() < 1)
    throw ParseError(origin + ": node id must be a positive integer");
  n.id = jn["id"].get<int>();

  const std::string where = "node " + std::to_string(n.id);
  if (!jn["name"].is_string()) throw ParseError(origin + ": " + where + ": name must be a string");
  n.name = jn["name"].get<std::string>();

  if (!jn["op"].is_string()) throw ParseError(origin + ": " + where + ": op must be a string");
  auto kind = op_kind_from_string(jn["op"].get<std::string>());
  if (!kind)
    throw ParseError(origin + ": " + where + ": unknown op '" + jn["op"].get<std::string>() + "'");
  n.op = *kind;

  if (jn.contains("fused_activation")) {
    if (!jn["fused_activation"].is_string())
      throw ParseError(origin + ": " + where + ": fused_activation must be a string");
    auto act = fused_act_from_string(jn["fused_activation"].get<std::string>());
    if (!act)
      throw ParseError(origin + ": " + where + ": unknown fused_activation '" +
                       jn["fused_activation"].get<std::string>() + "'");
    n.fused_activation = act;
  }
  if (jn.contains("macs")) n.macs = require_count(jn["macs"], where + ".macs", origin);
  if (jn.contains("out_elems"))
    n.out_elems = require_count(jn["out_elems"], where + ".out_elems", origin);
  if (jn.contains("weight_count"))
    n.weight_count = require_count(jn["weight_count"], where + ".weight_count", origin);
  if (jn.contains("time")) {
    double t = require_number(jn["time"], where + ".time", origin);
    if (!(t > 0.0)) throw ParseError(origin + ": " + where + ".time must be > 0");
    n.explicit_time = t;
  }
  return n;
}

CostOverrides parse_cost(const json& jc, const std::string& origin) {
  if (!jc.is_object()) throw ParseError(origin + ": 'cost' must be an object");
  reject_unknown_keys(
      jc, {"imc_mac_rate", "dpu_elem_rate", "imc_overhead", "dpu_overhead", "dpu_mac_penalty"},
      "cost", origin);
  CostOverrides c;
  if (jc.contains("imc_mac_rate"))
    c.imc_mac_rate = require_number(jc["imc_mac_rate"], "cost.imc_mac_rate", origin);
  if (jc.contains("dpu_elem_rate"))
    c.dpu_elem_rate = require_number(jc["dpu_elem_rate"], "cost.dpu_elem_rate", origin);
  if (jc.contains("imc_overhead"))
    c.imc_overhead = require_number(jc["imc_overhead"], "cost.imc_overhead", origin);
  if (jc.contains("dpu_overhead"))
    c.dpu_overhead = require_number(jc["dpu_overhead"], "cost.dpu_overhead", origin);
  if (jc.contains("dpu_mac_penalty")) {
    const json& v = jc["dpu_mac_penalty"];
    if (v.is_string() && v.get<std::string>() == "disallowed")
      c.dpu_mac_penalty = std::numeric_limits<double>::infinity();
    else
      c.dpu_mac_penalty = require_number(v, "cost.dpu_mac_penalty", origin);
  }
  return c;
}

}  // namespace

LoadedGraph parse_graph_json(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(origin + ": top-level value must be an object");
  reject_unknown_keys(doc, {"name", "nodes", "edges", "cost"}, "graph document", origin);
  for (const char* field : {"name", "nodes", "edges"})
    if (!doc.contains(field))
      throw ParseError(origin + ": missing required field '" + std::string(field) + "'");
  if (!doc["name"].is_string()) throw ParseError(origin + ": 'name' must be a string");
  if (!doc["nodes"].is_array()) throw ParseError(origin + ": 'nodes' must be an array");
  if (!doc["edges"].is_array()) throw ParseError(origin + ": 'edges' must be an array");

  std::vector<NodeSpec> nodes;
  for (const json& jn : doc["nodes"]) nodes.push_back(parse_node(jn, origin));

  std::vector<std::pair<int, int>> edges;
  for (const json& je : doc["edges"]) {
    if (!je.is_array() || je.size() != 2 || !je[0].is_number_integer() ||
        !je[1].is_number_integer())
      throw ParseError(origin + ": every edge must be a [from, to] integer pair");
    edges.emplace_back(je[0].get<int>(), je[1].get<int>());
  }

  LoadedGraph out{ModelGraph::build(doc["name"].get<std::string>(), std::move(nodes),
                                    std::move(edges)),
                  {}};
  if (doc.contains("cost")) out.cost = parse_cost(doc["cost"], origin);
  return out;
}

LoadedGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graph_json(buf.str(), path.string());
}

std::string graph_to_json_string(const ModelGraph& g) {
  ordered_json doc;
  doc["name"] = g.name();
  doc["nodes"] = ordered_json::array();
  for (const NodeSpec& n : g.nodes()) {
    ordered_json jn;
    jn["id"] = n.id;
    jn["name"] = n.name;
    jn["op"] = to_string(n.op);
    if (n.fused_activation) jn["fused_activation"] = to_string(*n.fused_activation);
    jn["macs"] = n.macs;
    jn["out_elems"] = n.out_elems;
    jn["weight_count"] = n.weight_count;
    if (n.explicit_time) jn["time"] = *n.explicit_time;
    doc["nodes"].push_back(jn);
  }
  doc["edges"] = ordered_json::array();
  for (const auto& [from, to] : g.edges()) doc["edges"].push_back({from, to});
  return doc.dump(2) + "\n";
}

}  // namespace imcmap
