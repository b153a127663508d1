#pragma once

// Test-only helpers: a self-contained deterministic RNG, random DAG
// generation, and brute-force oracles kept independent of the library's
// algorithm implementations.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "imcmap/cost.hpp"
#include "imcmap/graph.hpp"
#include "imcmap/scheduler.hpp"

namespace testutil {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  bool chance(int percent) { return below(100) < static_cast<std::uint64_t>(percent); }

 private:
  std::mt19937_64 eng_;
};

inline imcmap::OpKind random_kind(Rng& rng) {
  static const imcmap::OpKind kinds[] = {
      imcmap::OpKind::Conv,    imcmap::OpKind::Mvm,     imcmap::OpKind::Add,
      imcmap::OpKind::MaxPool, imcmap::OpKind::AvgPool, imcmap::OpKind::Concat,
      imcmap::OpKind::Split,   imcmap::OpKind::Reshape, imcmap::OpKind::Activation};
  return kinds[rng.below(9)];
}

// Random DAG with integer-valued explicit execution times (so float sums in
// oracles are exact). Edges only go from lower to higher ids.
inline imcmap::ModelGraph random_dag(std::uint64_t seed, int max_nodes,
                                     int edge_percent = 35) {
  Rng rng(seed);
  const int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_nodes - 1)));
  const int id_step = rng.chance(25) ? 3 : 1;  // occasionally non-contiguous ids

  std::vector<imcmap::NodeSpec> nodes;
  for (int i = 0; i < n; ++i) {
    imcmap::NodeSpec ns;
    ns.id = 1 + i * id_step;
    ns.name = "n" + std::to_string(ns.id);
    ns.op = random_kind(rng);
    if (imcmap::is_mac_kind(ns.op)) {
      ns.weight_count = static_cast<std::int64_t>(10 + rng.below(1000));
      if (rng.chance(50))
        ns.fused_activation =
            rng.chance(50) ? imcmap::FusedAct::ReLU : imcmap::FusedAct::SiLU;
    }
    ns.macs = static_cast<std::int64_t>(rng.below(100000));
    ns.out_elems = static_cast<std::int64_t>(1 + rng.below(5000));
    ns.explicit_time = static_cast<double>(1 + rng.below(20));
    nodes.push_back(ns);
  }

  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.chance(edge_percent)) edges.emplace_back(nodes[i].id, nodes[j].id);

  return imcmap::ModelGraph::build("random" + std::to_string(seed), std::move(nodes),
                                   std::move(edges));
}

inline imcmap::ModelGraph chain_graph(const std::vector<double>& times,
                                      imcmap::OpKind kind = imcmap::OpKind::Conv) {
  std::vector<imcmap::NodeSpec> nodes;
  std::vector<std::pair<int, int>> edges;
  for (std::size_t i = 0; i < times.size(); ++i) {
    imcmap::NodeSpec n;
    n.id = static_cast<int>(i + 1);
    n.name = "c" + std::to_string(n.id);
    n.op = kind;
    n.explicit_time = times[i];
    nodes.push_back(n);
    if (i > 0) edges.emplace_back(static_cast<int>(i), static_cast<int>(i + 1));
  }
  return imcmap::ModelGraph::build("chain", std::move(nodes), std::move(edges));
}

// 1 -> {2, 3} -> 4 with the given times, all the same kind.
inline imcmap::ModelGraph diamond_graph(double ta, double tb, double tc, double td,
                                        imcmap::OpKind kind = imcmap::OpKind::Conv) {
  std::vector<imcmap::NodeSpec> nodes;
  const double times[] = {ta, tb, tc, td};
  for (int i = 0; i < 4; ++i) {
    imcmap::NodeSpec n;
    n.id = i + 1;
    n.name = std::string(1, static_cast<char>('A' + i));
    n.op = kind;
    n.explicit_time = times[i];
    nodes.push_back(n);
  }
  return imcmap::ModelGraph::build("diamond", std::move(nodes),
                                   {{1, 2}, {1, 3}, {2, 4}, {3, 4}});
}

// Exhaustive source-to-sink path enumeration; best by (total, lexicographic
// id sequence). Times must be integer-valued for exact comparisons.
inline imcmap::PathResult brute_force_longest_path(const imcmap::ModelGraph& g,
                                                   const imcmap::CostTable& costs) {
  imcmap::PathResult best;
  bool have = false;
  std::vector<int> path;

  auto consider = [&]() {
    double total = 0.0;
    for (int id : path) total += costs.time(id);
    if (!have || total > best.total_time ||
        (total == best.total_time && path < best.node_ids)) {
      best.node_ids = path;
      best.total_time = total;
      have = true;
    }
  };

  std::function<void(int)> dfs = [&](int v) {
    path.push_back(v);
    if (g.successors(v).empty())
      consider();
    else
      for (int w : g.successors(v)) dfs(w);
    path.pop_back();
  };
  for (int s : g.source_ids()) dfs(s);
  return best;
}

// Transitive reachability via one DFS per node.
inline std::map<int, std::set<int>> reachability_oracle(const imcmap::ModelGraph& g) {
  std::map<int, std::set<int>> reach;
  for (int start : g.ids()) {
    std::vector<int> stack{start};
    std::set<int>& seen = reach[start];
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : g.successors(v))
        if (seen.insert(w).second) stack.push_back(w);
    }
  }
  return reach;
}

inline int count_class_nodes(const imcmap::ModelGraph& g, imcmap::PuType t) {
  int c = 0;
  for (const imcmap::NodeSpec& n : g.nodes())
    if (imcmap::classify(n) == t) ++c;
  return c;
}

// Pool with enough units of each class the graph actually uses.
inline imcmap::PuPool feasible_pool(const imcmap::ModelGraph& g, Rng& rng, int max_per_type) {
  int imc = count_class_nodes(g, imcmap::PuType::IMC) > 0
                ? 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_per_type)))
                : 0;
  int dpu = count_class_nodes(g, imcmap::PuType::DPU) > 0
                ? 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_per_type)))
                : 0;
  if (imc + dpu == 0) imc = 1;
  return imcmap::PuPool::make(imc, dpu);
}

inline imcmap::Mapping random_feasible_mapping(const imcmap::ModelGraph& g,
                                               const imcmap::PuPool& pool, Rng& rng) {
  imcmap::Mapping m;
  m.algo = imcmap::Algo::RD;
  for (const imcmap::NodeSpec& n : g.nodes()) {
    const std::vector<int> units = pool.units_of(imcmap::classify(n));
    m.assign[n.id] = units[rng.below(units.size())];
  }
  return m;
}

}  // namespace testutil
