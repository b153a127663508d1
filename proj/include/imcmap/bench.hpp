#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imcmap/cost.hpp"
#include "imcmap/graph.hpp"
#include "imcmap/graph_io.hpp"
#include "imcmap/scheduler.hpp"
#include "imcmap/sim.hpp"

namespace imcmap {

struct ResolvedModel {
  ModelGraph graph;
  CostOverrides file_cost;  // set only when loaded from a file with a cost header
};

/// A built-in model name resolves to its generator, anything else is
/// treated as a graph file path.
ResolvedModel resolve_model(const std::string& ref);

struct RunConfig {
  std::string model;
  Algo algo = Algo::LBLP;
  int n_imc = 1;
  int n_dpu = 1;
  std::optional<std::uint64_t> seed;  // RD only
  CostOverrides cli_cost;             // merged over the file header over defaults
  SimConfig sim;
};

struct RunOutput {
  ModelGraph graph;
  PuPool pool;
  CostParams params;
  CostTable costs;
  Mapping mapping;
  SimReport report;
};

RunOutput run_single(const RunConfig& cfg);

std::vector<std::uint64_t> default_rd_seeds();  // 1..20

struct SweepSpec {
  std::string model;
  std::vector<Algo> algorithms = {Algo::LBLP, Algo::WB, Algo::RR, Algo::RD};
  std::vector<int> imc_counts;
  std::vector<int> dpu_counts;
  std::vector<std::uint64_t> rd_seeds = default_rd_seeds();
  CostOverrides cli_cost;
  SimConfig sim;
};

struct SweepRow {
  std::string model;
  Algo algo = Algo::LBLP;
  int n_imc = 0;
  int n_dpu = 0;
  std::string seed_label;  // "" except for RD rows: the seed, or "median"
  double rate = 0.0;
  double norm_rate = 0.0;
  double latency = 0.0;
  double norm_latency = 0.0;
  double mean_util_imc = 0.0;
  double mean_util_dpu = 0.0;
  int bottleneck_pu = 0;
};

/// One row per (algo, n_imc, n_dpu) combination, RD expanded over its seeds
/// plus one median row per combination. Row order is the deterministic
/// cross product (algo, imc, dpu, seed) regardless of `threads`.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, int threads = 1);

/// Fill norm_rate (= rate / max rate) and norm_latency (= latency / min
/// latency) across the given rows.
void normalize_rows(std::vector<SweepRow>& rows);

/// Header: model,algo,n_imc,n_dpu,seed,rate,norm_rate,latency,norm_latency,
/// mean_util_imc,mean_util_dpu,bottleneck_pu. Six-decimal floats, LF endings.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

/// Self-contained two-panel SVG line chart (normalized rate and latency vs
/// total PU count, best value per total, one series per algorithm with RD
/// represented by its median rows). Deterministic output.
std::string sweep_to_svg(const std::vector<SweepRow>& rows);

/// Per-PU table: assigned node ids, weights area normalized to the largest
/// unit, utilization, one section per PU type with its mean utilization.
std::string report_table(const ModelGraph& g, const PuPool& pool, const CostTable& costs,
                         const Mapping& m, const SimReport& report);

/// Structural summary: node/kind counts, parameter total, longest path
/// under the given costs, concurrent pair count.
std::string inspect_text(const ModelGraph& g, const CostTable& costs);

/// JSON document with the run configuration, metrics, per-PU stats and the
/// mapping; written by `run --out`.
std::string run_output_json(const RunConfig& cfg, const RunOutput& out);

/// "4", "1..6" or "1,2,8" (comma-separated mix of values and ranges).
std::vector<int> parse_count_list(const std::string& text);
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace imcmap
