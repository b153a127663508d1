#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "imcmap/cost.hpp"
#include "imcmap/graph.hpp"

namespace imcmap {

enum class Algo { LBLP, WB, RR, RD };
const char* to_string(Algo a);
std::optional<Algo> algo_from_string(const std::string& s);

/// Total node-to-PU assignment. Every scheduler emits one of these; only RD
/// carries a seed.
struct Mapping {
  Algo algo = Algo::LBLP;
  std::optional<std::uint64_t> seed;
  std::map<int, int> assign;  // node id -> pu id

  int pu_of(int node_id) const;
};

/// Accumulated execution time and weight size per PU during scheduling.
struct LoadLedger {
  std::vector<double> exec_load;
  std::vector<std::int64_t> weight_load;

  explicit LoadLedger(int n_pus) : exec_load(n_pus, 0.0), weight_load(n_pus, 0) {}
};

/// Candidate with the smallest accumulated execution time outside `avoid`,
/// ties broken by lowest pu id. When every candidate is avoided the
/// avoidance is dropped and the global minimum-load candidate is returned.
int min_load_assign(const std::vector<int>& candidates, const LoadLedger& ledger,
                    const std::set<int>& avoid);

// Longest-path-first load balancing with parallel-branch avoidance.
Mapping schedule_lblp(const ModelGraph& g, const PuPool& pool, const CostTable& costs);
// Weight balancing for IMC nodes, execution-time balancing for DPU nodes.
Mapping schedule_wb(const ModelGraph& g, const PuPool& pool, const CostTable& costs);
// Cyclic assignment in ascending node-id order, one stream per PU type.
Mapping schedule_rr(const ModelGraph& g, const PuPool& pool, const CostTable& costs);
// Seeded random assignment; the first |PUs| nodes of each type land on
// distinct PUs. Identical seeds produce identical mappings.
Mapping schedule_rd(const ModelGraph& g, const PuPool& pool, const CostTable& costs,
                    std::uint64_t seed);

Mapping schedule(Algo algo, const ModelGraph& g, const PuPool& pool, const CostTable& costs,
                 std::optional<std::uint64_t> seed = std::nullopt);

/// Totality and type-feasibility check; returns one message per violation,
/// empty when the mapping is executable.
std::vector<std::string> validate_mapping(const ModelGraph& g, const PuPool& pool,
                                          const Mapping& m);

/// {"algo": ..., "seed": ... (RD only), "assign": [[node,pu], ...]} with
/// assign sorted by node id.
std::string mapping_to_json_string(const Mapping& m);

}  // namespace imcmap
