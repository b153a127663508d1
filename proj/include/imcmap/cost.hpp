#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>

#include "imcmap/graph.hpp"

namespace imcmap {

/// Parameters of the analytical execution-time model. Rates are work items
/// per abstract time unit, overheads are charged once per node invocation.
/// The defaults make one IMC MAC an order of magnitude cheaper than one DPU
/// element so that convolutions dominate, and they are frozen: every golden
/// number in the test suite assumes them.
struct CostParams {
  double imc_mac_rate = 1e4;   // MACs per time unit on an IMC
  double dpu_elem_rate = 1e3;  // output elements per time unit on a DPU
  double imc_overhead = 1.0;   // per-invocation setup time, IMC
  double dpu_overhead = 1.0;   // per-invocation setup time, DPU
  // Slowdown factor for MAC-class nodes executed on a DPU. Infinity means
  // such placements are disallowed (the default hard partition).
  double dpu_mac_penalty = std::numeric_limits<double>::infinity();

  bool mac_on_dpu_allowed() const { return std::isfinite(dpu_mac_penalty); }
  void validate() const;  // throws ConfigError
};

/// Per-field overrides, used for the graph-file cost header and CLI flags.
/// Precedence when merging: CLI flags > file header > defaults.
struct CostOverrides {
  std::optional<double> imc_mac_rate;
  std::optional<double> dpu_elem_rate;
  std::optional<double> imc_overhead;
  std::optional<double> dpu_overhead;
  std::optional<double> dpu_mac_penalty;
};

CostParams apply_overrides(CostParams base, const CostOverrides& o);

/// IMC for Conv/Mvm (with or without fused activation), DPU otherwise.
PuType classify(const NodeSpec& node);

struct CostEntry {
  PuType pu_type = PuType::IMC;
  double exec_time = 0.0;
  std::int64_t weight_size = 0;
};

/// One entry per graph node: compatible PU type, execution time on that
/// type, and resident weight size. exec_time comes from the parametric
/// model unless the node carries an explicit override:
///   IMC class: macs / imc_mac_rate + imc_overhead
///   DPU class: out_elems / dpu_elem_rate + dpu_overhead
class CostTable {
 public:
  CostTable() = default;

  const CostEntry& entry(int node_id) const;  // throws ConfigError when missing
  double time(int node_id) const { return entry(node_id).exec_time; }
  PuType type(int node_id) const { return entry(node_id).pu_type; }
  std::int64_t weight(int node_id) const { return entry(node_id).weight_size; }
  const std::map<int, CostEntry>& entries() const { return entries_; }

  /// Execution time of a MAC-class node on a DPU; populated only when the
  /// cost params carry a finite dpu_mac_penalty.
  std::optional<double> mac_on_dpu_time(int node_id) const;

  friend CostTable build_cost_table(const ModelGraph&, const CostParams&);

 private:
  std::map<int, CostEntry> entries_;
  std::map<int, double> mac_on_dpu_;
};

CostTable build_cost_table(const ModelGraph& g, const CostParams& p);

}  // namespace imcmap
