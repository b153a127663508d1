#include "imcmap/cost.hpp"

#include "imcmap/error.hpp"

namespace imcmap {

void CostParams::validate() const {
  if (!(imc_mac_rate > 0.0)) throw ConfigError("imc_mac_rate must be > 0");
  if (!(dpu_elem_rate > 0.0)) throw ConfigError("dpu_elem_rate must be > 0");
  if (imc_overhead < 0.0) throw ConfigError("imc_overhead must be >= 0");
  if (dpu_overhead < 0.0) throw ConfigError("dpu_overhead must be >= 0");
  if (std::isnan(dpu_mac_penalty) || dpu_mac_penalty < 1.0)
    throw ConfigError("dpu_mac_penalty must be >= 1 (or infinite to disallow)");
}

CostParams apply_overrides(CostParams base, const CostOverrides& o) {
  if (o.imc_mac_rate) base.imc_mac_rate = *o.imc_mac_rate;
  if (o.dpu_elem_rate) base.dpu_elem_rate = *o.dpu_elem_rate;
  if (o.imc_overhead) base.imc_overhead = *o.imc_overhead;
  if (o.dpu_overhead) base.dpu_overhead = *o.dpu_overhead;
  if (o.dpu_mac_penalty) base.dpu_mac_penalty = *o.dpu_mac_penalty;
  return base;
}

PuType classify(const NodeSpec& node) {
  return is_mac_kind(node.op) ? PuType::IMC : PuType::DPU;
}

const CostEntry& CostTable::entry(int node_id) const {
  auto it = entries_.find(node_id);
  if (it == entries_.end())
    throw ConfigError("missing cost entry for node " + std::to_string(node_id));
  return it->second;
}

std::optional<double> CostTable::mac_on_dpu_time(int node_id) const {
  auto it = mac_on_dpu_.find(node_id);
  if (it == mac_on_dpu_.end()) return std::nullopt;
  return it->second;
}

CostTable build_cost_table(const ModelGraph& g, const CostParams& p) {
  p.validate();
  CostTable table;
  for (const NodeSpec& n : g.nodes()) {
    CostEntry e;
    e.pu_type = classify(n);
    e.weight_size = n.weight_count;
    if (n.explicit_time) {
      e.exec_time = *n.explicit_time;
    } else if (e.pu_type == PuType::IMC) {
      e.exec_time = static_cast<double>(n.macs) / p.imc_mac_rate + p.imc_overhead;
    } else {
      e.exec_time = static_cast<double>(n.out_elems) / p.dpu_elem_rate + p.dpu_overhead;
    }
    if (!(e.exec_time > 0.0))
      throw ConfigError("computed non-positive exec time for node " + std::to_string(n.id));
    table.entries_[n.id] = e;
    if (e.pu_type == PuType::IMC && p.mac_on_dpu_allowed() && !n.explicit_time) {
      table.mac_on_dpu_[n.id] =
          static_cast<double>(n.macs) / p.imc_mac_rate * p.dpu_mac_penalty + p.dpu_overhead;
    }
  }
  return table;
}

}  // namespace imcmap
