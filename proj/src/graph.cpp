#include "imcmap/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <sstream>

#include "imcmap/cost.hpp"
#include "imcmap/error.hpp"

namespace imcmap {

const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::Conv: return "conv";
    case OpKind::Mvm: return "mvm";
    case OpKind::Add: return "add";
    case OpKind::MaxPool: return "maxpool";
    case OpKind::AvgPool: return "avgpool";
    case OpKind::Concat: return "concat";
    case OpKind::Split: return "split";
    case OpKind::Reshape: return "reshape";
    case OpKind::Activation: return "activation";
  }
  return "?";
}

const char* to_string(FusedAct a) {
  switch (a) {
    case FusedAct::ReLU: return "relu";
    case FusedAct::SiLU: return "silu";
  }
  return "?";
}

std::optional<OpKind> op_kind_from_string(const std::string& s) {
  static const std::pair<const char*, OpKind> table[] = {
      {"conv", OpKind::Conv},       {"mvm", OpKind::Mvm},
      {"add", OpKind::Add},         {"maxpool", OpKind::MaxPool},
      {"avgpool", OpKind::AvgPool}, {"concat", OpKind::Concat},
      {"split", OpKind::Split},     {"reshape", OpKind::Reshape},
      {"activation", OpKind::Activation},
  };
  for (const auto& [name, kind] : table)
    if (s == name) return kind;
  return std::nullopt;
}

std::optional<FusedAct> fused_act_from_string(const std::string& s) {
  if (s == "relu") return FusedAct::ReLU;
  if (s == "silu") return FusedAct::SiLU;
  return std::nullopt;
}

bool is_mac_kind(OpKind k) { return k == OpKind::Conv || k == OpKind::Mvm; }

namespace {

std::string node_label(const NodeSpec& n) {
  std::ostringstream os;
  os << "node " << n.id;
  if (!n.name.empty()) os << " ('" << n.name << "')";
  return os.str();
}

}  // namespace

ModelGraph ModelGraph::build(std::string name, std::vector<NodeSpec> nodes,
                             std::vector<std::pair<int, int>> edges) {
  if (nodes.empty()) throw ValidationError("graph '" + name + "' has no nodes");

  std::sort(nodes.begin(), nodes.end(),
            [](const NodeSpec& a, const NodeSpec& b) { return a.id < b.id; });

  ModelGraph g;
  g.name_ = std::move(name);

  for (const NodeSpec& n : nodes) {
    if (n.id < 1) throw ValidationError(node_label(n) + ": id must be >= 1");
    if (g.index_.count(n.id)) throw ValidationError("duplicate node id " + std::to_string(n.id));
    if (n.macs < 0) throw ValidationError(node_label(n) + ": macs must be >= 0");
    if (n.out_elems < 1) throw ValidationError(node_label(n) + ": out_elems must be >= 1");
    if (n.weight_count < 0) throw ValidationError(node_label(n) + ": weight_count must be >= 0");
    if (!is_mac_kind(n.op) && n.weight_count != 0)
      throw ValidationError(node_label(n) + ": weight_count must be 0 for op '" +
                            to_string(n.op) + "'");
    if (n.fused_activation && !is_mac_kind(n.op))
      throw ValidationError(node_label(n) + ": fused_activation is only valid on conv/mvm");
    if (n.explicit_time && *n.explicit_time <= 0.0)
      throw ValidationError(node_label(n) + ": time must be > 0");
    g.index_[n.id] = g.nodes_.size();
    g.nodes_.push_back(n);
    g.succ_[n.id];
    g.pred_[n.id];
  }

  std::sort(edges.begin(), edges.end());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto [from, to] = edges[i];
    if (!g.index_.count(from))
      throw ValidationError("edge [" + std::to_string(from) + "," + std::to_string(to) +
                            "] references unknown node id " + std::to_string(from));
    if (!g.index_.count(to))
      throw ValidationError("edge [" + std::to_string(from) + "," + std::to_string(to) +
                            "] references unknown node id " + std::to_string(to));
    if (from == to)
      throw ValidationError("self edge on node id " + std::to_string(from));
    if (i > 0 && edges[i] == edges[i - 1])
      throw ValidationError("duplicate edge [" + std::to_string(from) + "," +
                            std::to_string(to) + "]");
    g.succ_[from].push_back(to);
    g.pred_[to].push_back(from);
  }
  g.edges_ = std::move(edges);
  // adjacency vectors are ascending because the edge list was sorted

  std::vector<int> order = topo_order(g);  // throws on a cycle
  (void)order;
  if (g.source_ids().empty()) throw ValidationError("graph has no source node");
  if (g.sink_ids().empty()) throw ValidationError("graph has no sink node");
  return g;
}

bool ModelGraph::has_node(int id) const { return index_.count(id) != 0; }

const NodeSpec& ModelGraph::node(int id) const {
  auto it = index_.find(id);
  if (it == index_.end())
    throw ValidationError("unknown node id " + std::to_string(id));
  return nodes_[it->second];
}

const std::vector<int>& ModelGraph::successors(int id) const {
  auto it = succ_.find(id);
  if (it == succ_.end()) throw ValidationError("unknown node id " + std::to_string(id));
  return it->second;
}

const std::vector<int>& ModelGraph::predecessors(int id) const {
  auto it = pred_.find(id);
  if (it == pred_.end()) throw ValidationError("unknown node id " + std::to_string(id));
  return it->second;
}

std::vector<int> ModelGraph::ids() const {
  std::vector<int> out;
  out.reserve(nodes_.size());
  for (const NodeSpec& n : nodes_) out.push_back(n.id);
  return out;
}

std::vector<int> ModelGraph::source_ids() const {
  std::vector<int> out;
  for (const NodeSpec& n : nodes_)
    if (predecessors(n.id).empty()) out.push_back(n.id);
  return out;
}

std::vector<int> ModelGraph::sink_ids() const {
  std::vector<int> out;
  for (const NodeSpec& n : nodes_)
    if (successors(n.id).empty()) out.push_back(n.id);
  return out;
}

std::vector<int> topo_order(const ModelGraph& g) {
  std::map<int, int> indeg;
  for (const NodeSpec& n : g.nodes()) indeg[n.id] = static_cast<int>(g.predecessors(n.id).size());

  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (const auto& [id, d] : indeg)
    if (d == 0) ready.push(id);

  std::vector<int> order;
  order.reserve(g.node_count());
  while (!ready.empty()) {
    int id = ready.top();
    ready.pop();
    order.push_back(id);
    for (int s : g.successors(id))
      if (--indeg[s] == 0) ready.push(s);
  }
  if (order.size() != g.node_count())
    throw ValidationError("graph '" + g.name() + "' contains a cycle");
  return order;
}

PathResult longest_path(const ModelGraph& g, const CostTable& costs) {
  const std::vector<int> order = topo_order(g);

  // down[v]: maximum summed time of a path starting at v, ending at a sink.
  std::map<int, double> down;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    double best = 0.0;
    bool has_succ = false;
    for (int w : g.successors(v)) {
      if (!has_succ || down[w] > best) best = down[w];
      has_succ = true;
    }
    down[v] = costs.time(v) + (has_succ ? best : 0.0);
  }

  int start = -1;
  for (int s : g.source_ids())
    if (start == -1 || down[s] > down[start]) start = s;
  // equal-valued sources: keep the lowest id (source_ids is ascending and
  // the comparison above is strict)

  PathResult res;
  int v = start;
  while (true) {
    res.node_ids.push_back(v);
    const auto& succ = g.successors(v);
    if (succ.empty()) break;
    int next = -1;
    for (int w : succ) {
      // exact float check: down[v] was computed as time(v) + down[w*]
      if (costs.time(v) + down[w] == down[v]) {
        next = w;  // ascending order, first hit is the smallest id
        break;
      }
    }
    if (next == -1) throw Error("internal: longest-path reconstruction failed");
    v = next;
  }
  // front-to-back accumulation, matching the simulator's critical path sum
  res.total_time = 0.0;
  for (int id : res.node_ids) res.total_time += costs.time(id);
  return res;
}

std::vector<std::pair<int, int>> concurrency_relation(const ModelGraph& g) {
  const std::vector<int> order = topo_order(g);
  const std::size_t n = order.size();

  std::map<int, std::size_t> pos;
  for (std::size_t i = 0; i < n; ++i) pos[order[i]] = i;

  // reach[i][j]: order[i] reaches order[j] via one or more edges
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t i = n; i-- > 0;) {
    int v = order[i];
    for (int w : g.successors(v)) {
      std::size_t j = pos[w];
      reach[i][j] = 1;
      for (std::size_t k = 0; k < n; ++k)
        if (reach[j][k]) reach[i][k] = 1;
    }
  }

  std::vector<int> ids = g.ids();
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = a + 1; b < ids.size(); ++b) {
      std::size_t i = pos[ids[a]], j = pos[ids[b]];
      if (!reach[i][j] && !reach[j][i]) pairs.emplace_back(ids[a], ids[b]);
    }
  return pairs;
}

const char* to_string(PuType t) { return t == PuType::IMC ? "imc" : "dpu"; }

PuPool PuPool::make(int n_imc, int n_dpu) {
  if (n_imc < 0 || n_dpu < 0) throw ConfigError("PU counts must be >= 0");
  if (n_imc + n_dpu < 1) throw ConfigError("pool must contain at least one PU");
  PuPool pool;
  for (int i = 0; i < n_imc; ++i) pool.units.push_back({i, PuType::IMC});
  for (int i = 0; i < n_dpu; ++i) pool.units.push_back({n_imc + i, PuType::DPU});
  return pool;
}

int PuPool::count(PuType t) const {
  int c = 0;
  for (const PuUnit& u : units)
    if (u.type == t) ++c;
  return c;
}

std::vector<int> PuPool::units_of(PuType t) const {
  std::vector<int> out;
  for (const PuUnit& u : units)
    if (u.type == t) out.push_back(u.pu_id);
  return out;
}

PuType PuPool::type_of(int pu_id) const {
  if (pu_id < 0 || pu_id >= size()) throw ConfigError("unknown pu id " + std::to_string(pu_id));
  return units[static_cast<std::size_t>(pu_id)].type;
}

}  // namespace imcmap
