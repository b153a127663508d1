#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace imcmap {

enum class OpKind { Conv, Mvm, Add, MaxPool, AvgPool, Concat, Split, Reshape, Activation };
enum class FusedAct { ReLU, SiLU };

const char* to_string(OpKind k);
const char* to_string(FusedAct a);
std::optional<OpKind> op_kind_from_string(const std::string& s);
std::optional<FusedAct> fused_act_from_string(const std::string& s);

/// MAC-class operations (convolutions and matrix-vector products) run on
/// IMC units; every other kind is a digital operation.
bool is_mac_kind(OpKind k);

struct NodeSpec {
  int id = 0;
  std::string name;
  OpKind op = OpKind::Conv;
  std::optional<FusedAct> fused_activation;  // Conv/Mvm only
  std::int64_t macs = 0;
  std::int64_t out_elems = 1;
  std::int64_t weight_count = 0;  // zero for non MAC-class kinds
  std::optional<double> explicit_time;
};

/// Node-weighted DAG of CNN operations. build() validates every structural
/// invariant (unique positive ids, acyclicity, edge endpoints, per-kind
/// field constraints); instances are immutable afterwards.
class ModelGraph {
 public:
  static ModelGraph build(std::string name, std::vector<NodeSpec> nodes,
                          std::vector<std::pair<int, int>> edges);

  const std::string& name() const { return name_; }
  const std::vector<NodeSpec>& nodes() const { return nodes_; }  // ascending id
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }

  bool has_node(int id) const;
  const NodeSpec& node(int id) const;
  const std::vector<int>& successors(int id) const;    // ascending
  const std::vector<int>& predecessors(int id) const;  // ascending

  std::vector<int> ids() const;         // ascending
  std::vector<int> source_ids() const;  // no predecessors
  std::vector<int> sink_ids() const;    // no successors

 private:
  std::string name_;
  std::vector<NodeSpec> nodes_;
  std::vector<std::pair<int, int>> edges_;
  std::map<int, std::vector<int>> succ_;
  std::map<int, std::vector<int>> pred_;
  std::map<int, std::size_t> index_;
};

/// Kahn topological order with an ordered frontier: among simultaneously
/// ready nodes the lowest id goes first, so the result is unique.
std::vector<int> topo_order(const ModelGraph& g);

class CostTable;

struct PathResult {
  std::vector<int> node_ids;
  double total_time = 0.0;
};

/// Source-to-sink path maximizing the summed node execution time. Ties are
/// broken toward the lexicographically smallest id sequence. The reported
/// total is accumulated front to back along the returned path.
PathResult longest_path(const ModelGraph& g, const CostTable& costs);

/// All unordered pairs {u, v} (returned with u < v) such that neither node
/// reaches the other along directed edges.
std::vector<std::pair<int, int>> concurrency_relation(const ModelGraph& g);

enum class PuType { IMC, DPU };
const char* to_string(PuType t);

struct PuUnit {
  int pu_id = 0;
  PuType type = PuType::IMC;
};

/// Pool of processing units. IMC units come first, then DPU units, with
/// pu_ids contiguous from zero.
struct PuPool {
  std::vector<PuUnit> units;

  static PuPool make(int n_imc, int n_dpu);

  int size() const { return static_cast<int>(units.size()); }
  int count(PuType t) const;
  std::vector<int> units_of(PuType t) const;  // ascending pu ids
  PuType type_of(int pu_id) const;
};

}  // namespace imcmap
