#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imcmap/cost.hpp"
#include "imcmap/graph.hpp"
#include "imcmap/scheduler.hpp"

namespace imcmap {

struct SimConfig {
  int frames = 64;         // inference frames pushed through the pipeline
  int warmup_frames = 16;  // excluded from the steady-state measurement
  double comm_cost = 0.0;  // per-edge transfer time
  bool record_trace = false;

  void validate() const;  // throws ConfigError
};

struct SimTask {
  int node_id = 0;
  int frame = 0;
  int pu_id = 0;
  double start = 0.0;
  double end = 0.0;
};

struct PuStats {
  double busy_per_frame = 0.0;  // summed exec time of the nodes mapped here
  double utilization = 0.0;     // busy_per_frame / period
  std::int64_t weights_area = 0;
};

struct SimReport {
  double latency = 0.0;  // single-frame makespan, measured in isolation
  double period = 0.0;   // steady-state inter-completion time
  double rate = 0.0;     // 1 / period
  std::vector<PuStats> per_pu;  // indexed by pu id, idle units included
  std::vector<SimTask> trace;   // sorted (start, pu, node); empty unless requested
};

/// Deterministic discrete-event simulation of compute-and-forward pipelined
/// execution. A (node, frame) task becomes ready once every same-frame
/// predecessor has finished (plus comm_cost per edge); frame inputs are all
/// available at time zero. Each PU runs one task at a time and, when free,
/// picks the ready task with the lowest (frame, topological rank, node id).
/// Latency comes from a separate single-frame pass; the period is the mean
/// inter-completion time over the post-warmup window and must be constant
/// within 1e-6 relative or ConvergenceError is thrown.
SimReport simulate(const ModelGraph& g, const PuPool& pool, const CostTable& costs,
                   const Mapping& m, const SimConfig& cfg = {});

/// Analytic steady-state bound: max over PUs of the summed execution time
/// of the nodes assigned there.
double bottleneck_bound(const CostTable& costs, const Mapping& m);

/// Mapping-independent latency floor: the longest-path total, plus
/// comm_cost per hop along that path when comm_cost > 0.
double latency_lower_bound(const ModelGraph& g, const CostTable& costs,
                           double comm_cost = 0.0);

/// CSV with header node_id,frame,pu_id,start,end.
std::string trace_to_csv(const std::vector<SimTask>& trace);

}  // namespace imcmap
