#include "imcmap/scheduler.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "imcmap/error.hpp"

namespace imcmap {

const char* to_string(Algo a) {
  switch (a) {
    case Algo::LBLP: return "lblp";
    case Algo::WB: return "wb";
    case Algo::RR: return "rr";
    case Algo::RD: return "rd";
  }
  return "?";
}

std::optional<Algo> algo_from_string(const std::string& s) {
  if (s == "lblp") return Algo::LBLP;
  if (s == "wb") return Algo::WB;
  if (s == "rr") return Algo::RR;
  if (s == "rd") return Algo::RD;
  return std::nullopt;
}

int Mapping::pu_of(int node_id) const {
  auto it = assign.find(node_id);
  if (it == assign.end())
    throw InfeasibleError("node " + std::to_string(node_id) + " is not mapped");
  return it->second;
}

int min_load_assign(const std::vector<int>& candidates, const LoadLedger& ledger,
                    const std::set<int>& avoid) {
  if (candidates.empty()) throw ConfigError("no processing units of the required type");
  int best = -1, best_allowed = -1;
  for (int pu : candidates) {
    double load = ledger.exec_load[static_cast<std::size_t>(pu)];
    if (best == -1 || load < ledger.exec_load[static_cast<std::size_t>(best)]) best = pu;
    if (!avoid.count(pu) &&
        (best_allowed == -1 || load < ledger.exec_load[static_cast<std::size_t>(best_allowed)]))
      best_allowed = pu;
  }
  return best_allowed != -1 ? best_allowed : best;
}

namespace {

constexpr PuType kTypes[] = {PuType::IMC, PuType::DPU};

std::vector<int> class_node_ids(const ModelGraph& g, const CostTable& costs, PuType t) {
  std::vector<int> out;
  for (const NodeSpec& n : g.nodes())
    if (costs.type(n.id) == t) out.push_back(n.id);
  return out;  // ascending, nodes() is id-sorted
}

void require_pool_covers_graph(const ModelGraph& g, const PuPool& pool, const CostTable& costs) {
  for (PuType t : kTypes)
    if (!class_node_ids(g, costs, t).empty() && pool.count(t) == 0)
      throw ConfigError(std::string("graph '") + g.name() + "' contains " + to_string(t) +
                        "-class nodes but the pool has no " + to_string(t) + " units");
}

void sort_desc_time(std::vector<int>& ids, const CostTable& costs) {
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    double ta = costs.time(a), tb = costs.time(b);
    if (ta != tb) return ta > tb;
    return a < b;
  });
}

void sort_desc_weight(std::vector<int>& ids, const CostTable& costs) {
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    std::int64_t wa = costs.weight(a), wb = costs.weight(b);
    if (wa != wb) return wa > wb;
    return a < b;
  });
}

void place(Mapping& m, LoadLedger& ledger, const CostTable& costs, int node,
           const std::vector<int>& candidates, const std::set<int>& avoid) {
  int pu = min_load_assign(candidates, ledger, avoid);
  m.assign[node] = pu;
  ledger.exec_load[static_cast<std::size_t>(pu)] += costs.time(node);
  ledger.weight_load[static_cast<std::size_t>(pu)] += costs.weight(node);
}

// Uniform draws on top of a standardized engine; rejection sampling keeps
// the stream identical across standard libraries.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace

Mapping schedule_lblp(const ModelGraph& g, const PuPool& pool, const CostTable& costs) {
  require_pool_covers_graph(g, pool, costs);

  std::map<int, std::vector<int>> concurrent;
  for (const auto& [u, v] : concurrency_relation(g)) {
    concurrent[u].push_back(v);
    concurrent[v].push_back(u);
  }

  const PathResult lp = longest_path(g, costs);
  const std::set<int> lp_set(lp.node_ids.begin(), lp.node_ids.end());

  Mapping m;
  m.algo = Algo::LBLP;
  LoadLedger ledger(pool.size());

  for (PuType t : kTypes) {
    const std::vector<int> candidates = pool.units_of(t);
    std::vector<int> lp_nodes, rest;
    for (int id : class_node_ids(g, costs, t))
      (lp_set.count(id) ? lp_nodes : rest).push_back(id);
    sort_desc_time(lp_nodes, costs);
    sort_desc_time(rest, costs);

    for (const std::vector<int>* list : {&lp_nodes, &rest}) {
      for (int node : *list) {
        // keep the node off units already hosting something it can run
        // concurrently with, when any other unit is available
        std::set<int> avoid;
        auto it = concurrent.find(node);
        if (it != concurrent.end())
          for (int other : it->second) {
            auto placed = m.assign.find(other);
            if (placed != m.assign.end()) avoid.insert(placed->second);
          }
        place(m, ledger, costs, node, candidates, avoid);
      }
    }
  }
  return m;
}

Mapping schedule_wb(const ModelGraph& g, const PuPool& pool, const CostTable& costs) {
  require_pool_covers_graph(g, pool, costs);

  Mapping m;
  m.algo = Algo::WB;
  LoadLedger ledger(pool.size());

  // IMC nodes: heaviest weights first onto the unit with the least weights
  std::vector<int> imc_nodes = class_node_ids(g, costs, PuType::IMC);
  sort_desc_weight(imc_nodes, costs);
  const std::vector<int> imc_units = pool.units_of(PuType::IMC);
  for (int node : imc_nodes) {
    int best = -1;
    for (int pu : imc_units)
      if (best == -1 ||
          ledger.weight_load[static_cast<std::size_t>(pu)] <
              ledger.weight_load[static_cast<std::size_t>(best)])
        best = pu;
    m.assign[node] = best;
    ledger.exec_load[static_cast<std::size_t>(best)] += costs.time(node);
    ledger.weight_load[static_cast<std::size_t>(best)] += costs.weight(node);
  }

  // DPU nodes: longest execution time first onto the least busy unit
  std::vector<int> dpu_nodes = class_node_ids(g, costs, PuType::DPU);
  sort_desc_time(dpu_nodes, costs);
  const std::vector<int> dpu_units = pool.units_of(PuType::DPU);
  for (int node : dpu_nodes) place(m, ledger, costs, node, dpu_units, {});

  return m;
}

Mapping schedule_rr(const ModelGraph& g, const PuPool& pool, const CostTable& costs) {
  require_pool_covers_graph(g, pool, costs);

  Mapping m;
  m.algo = Algo::RR;
  for (PuType t : kTypes) {
    const std::vector<int> units = pool.units_of(t);
    const std::vector<int> nodes = class_node_ids(g, costs, t);
    for (std::size_t k = 0; k < nodes.size(); ++k)
      m.assign[nodes[k]] = units[k % units.size()];
  }
  return m;
}

Mapping schedule_rd(const ModelGraph& g, const PuPool& pool, const CostTable& costs,
                    std::uint64_t seed) {
  require_pool_covers_graph(g, pool, costs);

  Mapping m;
  m.algo = Algo::RD;
  m.seed = seed;
  DetRng rng(seed);

  for (PuType t : kTypes) {
    const std::vector<int> units = pool.units_of(t);
    std::vector<int> nodes = class_node_ids(g, costs, t);
    if (nodes.empty()) continue;

    const std::size_t k = std::min(nodes.size(), units.size());

    // phase 1: k distinct nodes onto k distinct units
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.below(nodes.size() - i));
      std::swap(nodes[i], nodes[j]);
    }
    std::vector<int> perm = units;
    for (std::size_t i = 0; i + 1 < perm.size(); ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.below(perm.size() - i));
      std::swap(perm[i], perm[j]);
    }
    for (std::size_t i = 0; i < k; ++i) m.assign[nodes[i]] = perm[i];

    // phase 2: the rest land on uniformly random units, ascending id order
    std::vector<int> rest(nodes.begin() + static_cast<std::ptrdiff_t>(k), nodes.end());
    std::sort(rest.begin(), rest.end());
    for (int node : rest)
      m.assign[node] = units[static_cast<std::size_t>(rng.below(units.size()))];
  }
  return m;
}

Mapping schedule(Algo algo, const ModelGraph& g, const PuPool& pool, const CostTable& costs,
                 std::optional<std::uint64_t> seed) {
  switch (algo) {
    case Algo::LBLP: return schedule_lblp(g, pool, costs);
    case Algo::WB: return schedule_wb(g, pool, costs);
    case Algo::RR: return schedule_rr(g, pool, costs);
    case Algo::RD: return schedule_rd(g, pool, costs, seed.value_or(1));
  }
  throw ConfigError("unknown algorithm");
}

std::vector<std::string> validate_mapping(const ModelGraph& g, const PuPool& pool,
                                          const Mapping& m) {
  std::vector<std::string> violations;
  for (const NodeSpec& n : g.nodes())
    if (!m.assign.count(n.id))
      violations.push_back("node " + std::to_string(n.id) + " is missing from the mapping");
  for (const auto& [node, pu] : m.assign) {
    if (!g.has_node(node)) {
      violations.push_back("mapping references unknown node " + std::to_string(node));
      continue;
    }
    if (pu < 0 || pu >= pool.size()) {
      violations.push_back("node " + std::to_string(node) + " assigned to unknown pu " +
                           std::to_string(pu));
      continue;
    }
    PuType need = classify(g.node(node));
    if (pool.type_of(pu) != need)
      violations.push_back("node " + std::to_string(node) + " (" +
                           to_string(g.node(node).op) + ") assigned to " +
                           to_string(pool.type_of(pu)) + " pu " + std::to_string(pu) +
                           " but requires " + to_string(need));
  }
  return violations;
}

std::string mapping_to_json_string(const Mapping& m) {
  nlohmann::ordered_json doc;
  doc["algo"] = to_string(m.algo);
  if (m.seed) doc["seed"] = *m.seed;
  doc["assign"] = nlohmann::ordered_json::array();
  for (const auto& [node, pu] : m.assign) doc["assign"].push_back({node, pu});
  return doc.dump(2) + "\n";
}

}  // namespace imcmap
