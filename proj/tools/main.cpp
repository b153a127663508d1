#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "imcmap/bench.hpp"
#include "imcmap/error.hpp"
#include "imcmap/models.hpp"

namespace {

using namespace imcmap;

struct CostFlags {
  double imc_mac_rate = 0, dpu_elem_rate = 0, imc_overhead = 0, dpu_overhead = 0;
  CLI::Option *o_rate_imc = nullptr, *o_rate_dpu = nullptr, *o_ovh_imc = nullptr,
              *o_ovh_dpu = nullptr;

  void attach(CLI::App* app) {
    o_rate_imc = app->add_option("--imc-mac-rate", imc_mac_rate, "MACs per time unit on an IMC");
    o_rate_dpu =
        app->add_option("--dpu-elem-rate", dpu_elem_rate, "elements per time unit on a DPU");
    o_ovh_imc = app->add_option("--imc-overhead", imc_overhead, "per-node IMC setup time");
    o_ovh_dpu = app->add_option("--dpu-overhead", dpu_overhead, "per-node DPU setup time");
  }

  CostOverrides overrides() const {
    CostOverrides o;
    if (o_rate_imc->count()) o.imc_mac_rate = imc_mac_rate;
    if (o_rate_dpu->count()) o.dpu_elem_rate = dpu_elem_rate;
    if (o_ovh_imc->count()) o.imc_overhead = imc_overhead;
    if (o_ovh_dpu->count()) o.dpu_overhead = dpu_overhead;
    return o;
  }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << content;
}

Algo parse_algo(const std::string& text) {
  auto a = algo_from_string(text);
  if (!a) throw ConfigError("unknown algorithm '" + text + "' (expected lblp, wb, rr or rd)");
  return *a;
}

std::vector<Algo> parse_algo_list(const std::string& text) {
  std::vector<Algo> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) out.push_back(parse_algo(token));
  if (out.empty()) throw ConfigError("empty algorithm list");
  return out;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"CNN graph mapping and pipelined-execution simulation over IMC/DPU pools"};
  app.require_subcommand(1);

  // --- run ---
  auto* run = app.add_subcommand("run", "map one model and simulate it");
  std::string run_model, run_algo = "lblp", run_trace, run_out;
  int run_imc = 1, run_dpu = 1, run_frames = 64, run_warmup = 16;
  std::uint64_t run_seed = 0;
  double run_comm = 0.0;
  bool run_table = false;
  run->add_option("--model", run_model, "builtin model name or graph file path")->required();
  run->add_option("--algo", run_algo, "lblp | wb | rr | rd")->required();
  run->add_option("--imc", run_imc, "number of IMC units")->required();
  run->add_option("--dpu", run_dpu, "number of DPU units")->required();
  auto* run_seed_opt = run->add_option("--seed", run_seed, "rd seed (default 1)");
  run->add_option("--frames", run_frames, "pipeline frames to simulate");
  run->add_option("--warmup", run_warmup, "frames excluded from the period measurement");
  run->add_option("--comm-cost", run_comm, "per-edge transfer time");
  run->add_option("--trace", run_trace, "write the task trace CSV here");
  run->add_flag("--table", run_table, "print the per-PU report table");
  run->add_option("--out", run_out, "write the run report JSON here");
  CostFlags run_cost;
  run_cost.attach(run);

  // --- sweep ---
  auto* sweep = app.add_subcommand("sweep", "run a cross product of configurations");
  std::string sw_model, sw_algos = "lblp,wb,rr,rd", sw_imc, sw_dpu, sw_totals,
              sw_seeds = "1..20", sw_out, sw_svg;
  int sw_frames = 64, sw_warmup = 16, sw_threads = 1, sw_dpu_fixed = 0;
  double sw_comm = 0.0;
  sweep->add_option("--model", sw_model, "builtin model name or graph file path")->required();
  sweep->add_option("--algos", sw_algos, "comma-separated algorithms");
  auto* sw_imc_opt = sweep->add_option("--imc", sw_imc, "IMC counts, e.g. 1..10 or 2,4,8");
  auto* sw_dpu_opt = sweep->add_option("--dpu", sw_dpu, "DPU counts");
  auto* sw_tot_opt = sweep->add_option(
      "--total-pus", sw_totals, "total PU counts; combine with a single --dpu value");
  sweep->add_option("--seeds", sw_seeds, "rd seeds");
  sweep->add_option("--frames", sw_frames, "pipeline frames per simulation");
  sweep->add_option("--warmup", sw_warmup, "frames excluded from the period measurement");
  sweep->add_option("--comm-cost", sw_comm, "per-edge transfer time");
  sweep->add_option("--threads", sw_threads, "worker threads (output is order-stable)");
  sweep->add_option("--out", sw_out, "write the CSV here instead of stdout");
  sweep->add_option("--svg", sw_svg, "write a two-panel SVG chart here");
  CostFlags sw_cost;
  sw_cost.attach(sweep);

  // --- inspect ---
  auto* inspect = app.add_subcommand("inspect", "structural summary of a model");
  std::string in_model;
  inspect->add_option("--model", in_model, "builtin model name or graph file path")->required();
  CostFlags in_cost;
  in_cost.attach(inspect);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) {
    RunConfig cfg;
    cfg.model = run_model;
    cfg.algo = parse_algo(run_algo);
    cfg.n_imc = run_imc;
    cfg.n_dpu = run_dpu;
    if (run_seed_opt->count()) cfg.seed = run_seed;
    cfg.cli_cost = run_cost.overrides();
    cfg.sim.frames = run_frames;
    cfg.sim.warmup_frames = run_warmup;
    cfg.sim.comm_cost = run_comm;
    cfg.sim.record_trace = !run_trace.empty();

    RunOutput out = run_single(cfg);
    std::cout << "model=" << run_model << " algo=" << to_string(cfg.algo)
              << " imc=" << cfg.n_imc << " dpu=" << cfg.n_dpu;
    if (out.mapping.seed) std::cout << " seed=" << *out.mapping.seed;
    std::cout << "\n";
    char line[256];
    std::snprintf(line, sizeof(line), "latency=%.6f period=%.6f rate=%.6f\n",
                  out.report.latency, out.report.period, out.report.rate);
    std::cout << line;
    if (run_table) std::cout << "\n" << report_table(out.graph, out.pool, out.costs,
                                                     out.mapping, out.report);
    if (!run_trace.empty()) write_file(run_trace, trace_to_csv(out.report.trace));
    if (!run_out.empty()) write_file(run_out, run_output_json(cfg, out));
    return 0;
  }

  if (sweep->parsed()) {
    SweepSpec spec;
    spec.model = sw_model;
    spec.algorithms = parse_algo_list(sw_algos);
    if (sw_tot_opt->count()) {
      if (sw_imc_opt->count())
        throw ConfigError("--total-pus and --imc are mutually exclusive");
      if (!sw_dpu_opt->count())
        throw ConfigError("--total-pus needs a single --dpu value");
      std::vector<int> dpus = parse_count_list(sw_dpu);
      if (dpus.size() != 1)
        throw ConfigError("--total-pus needs a single --dpu value");
      sw_dpu_fixed = dpus[0];
      for (int total : parse_count_list(sw_totals))
        if (total - sw_dpu_fixed >= 1) spec.imc_counts.push_back(total - sw_dpu_fixed);
      if (spec.imc_counts.empty())
        throw ConfigError("--total-pus leaves no room for IMC units");
      spec.dpu_counts = {sw_dpu_fixed};
    } else {
      if (!sw_imc_opt->count() || !sw_dpu_opt->count())
        throw ConfigError("sweep needs --imc and --dpu (or --total-pus with --dpu)");
      spec.imc_counts = parse_count_list(sw_imc);
      spec.dpu_counts = parse_count_list(sw_dpu);
    }
    spec.rd_seeds = parse_seed_list(sw_seeds);
    spec.cli_cost = sw_cost.overrides();
    spec.sim.frames = sw_frames;
    spec.sim.warmup_frames = sw_warmup;
    spec.sim.comm_cost = sw_comm;

    std::vector<SweepRow> rows = run_sweep(spec, sw_threads);
    const std::string csv = sweep_to_csv(rows);
    if (sw_out.empty())
      std::cout << csv;
    else
      write_file(sw_out, csv);
    if (!sw_svg.empty()) write_file(sw_svg, sweep_to_svg(rows));
    return 0;
  }

  // inspect
  ResolvedModel rm = resolve_model(in_model);
  CostParams params =
      apply_overrides(apply_overrides(CostParams{}, rm.file_cost), in_cost.overrides());
  std::cout << inspect_text(rm.graph, build_cost_table(rm.graph, params));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const imcmap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
