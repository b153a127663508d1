#include "imcmap/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "imcmap/error.hpp"
#include "imcmap/models.hpp"

namespace imcmap {

namespace {

std::string f6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string f1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

double mean_utilization(const PuPool& pool, const SimReport& rep, PuType t) {
  double sum = 0.0;
  int n = 0;
  for (const PuUnit& u : pool.units)
    if (u.type == t) {
      sum += rep.per_pu[static_cast<std::size_t>(u.pu_id)].utilization;
      ++n;
    }
  return n > 0 ? sum / n : 0.0;
}

int bottleneck_pu_id(const SimReport& rep) {
  int best = 0;
  for (int pu = 1; pu < static_cast<int>(rep.per_pu.size()); ++pu)
    if (rep.per_pu[static_cast<std::size_t>(pu)].busy_per_frame >
        rep.per_pu[static_cast<std::size_t>(best)].busy_per_frame)
      best = pu;
  return best;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double lower_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

}  // namespace

ResolvedModel resolve_model(const std::string& ref) {
  if (is_builtin_model(ref)) return {builtin_model(ref), {}};
  LoadedGraph lg = load_graph(ref);
  return {std::move(lg.graph), lg.cost};
}

RunOutput run_single(const RunConfig& cfg) {
  cfg.sim.validate();
  if (cfg.seed && cfg.algo != Algo::RD)
    throw ConfigError("a seed only applies to the rd algorithm");

  ResolvedModel rm = resolve_model(cfg.model);
  CostParams params = apply_overrides(apply_overrides(CostParams{}, rm.file_cost), cfg.cli_cost);
  params.validate();

  RunOutput out{std::move(rm.graph), PuPool::make(cfg.n_imc, cfg.n_dpu), params, {}, {}, {}};
  out.costs = build_cost_table(out.graph, params);
  out.mapping = schedule(cfg.algo, out.graph, out.pool, out.costs, cfg.seed);
  out.report = simulate(out.graph, out.pool, out.costs, out.mapping, cfg.sim);
  return out;
}

std::vector<std::uint64_t> default_rd_seeds() {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 20; ++s) seeds.push_back(s);
  return seeds;
}

namespace {

struct Job {
  Algo algo;
  int n_imc;
  int n_dpu;
  std::optional<std::uint64_t> seed;
};

SweepRow row_from_run(const SweepSpec& spec, const Job& job, const RunOutput& out) {
  SweepRow row;
  row.model = spec.model;
  row.algo = job.algo;
  row.n_imc = job.n_imc;
  row.n_dpu = job.n_dpu;
  row.seed_label = job.seed ? std::to_string(*job.seed) : "";
  row.rate = out.report.rate;
  row.latency = out.report.latency;
  row.mean_util_imc = mean_utilization(out.pool, out.report, PuType::IMC);
  row.mean_util_dpu = mean_utilization(out.pool, out.report, PuType::DPU);
  row.bottleneck_pu = bottleneck_pu_id(out.report);
  return row;
}

template <typename Fn>
void rethrow_with_context(const Job& job, const std::string& model, Fn&& fn) {
  std::ostringstream ctx;
  ctx << "sweep combination model=" << model << " algo=" << to_string(job.algo)
      << " imc=" << job.n_imc << " dpu=" << job.n_dpu;
  if (job.seed) ctx << " seed=" << *job.seed;
  try {
    fn();
  } catch (const ConfigError& e) {
    throw ConfigError(ctx.str() + ": " + e.what());
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(ctx.str() + ": " + e.what());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(ctx.str() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ctx.str() + ": " + e.what());
  }
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int threads) {
  if (spec.algorithms.empty()) throw ConfigError("sweep needs at least one algorithm");
  if (spec.imc_counts.empty() || spec.dpu_counts.empty())
    throw ConfigError("sweep needs non-empty imc and dpu count lists");
  for (int c : spec.imc_counts)
    if (c < 1) throw ConfigError("sweep imc counts must be >= 1");
  for (int c : spec.dpu_counts)
    if (c < 1) throw ConfigError("sweep dpu counts must be >= 1");
  bool has_rd = false;
  for (Algo a : spec.algorithms)
    if (a == Algo::RD) has_rd = true;
  if (has_rd && spec.rd_seeds.empty()) throw ConfigError("rd requires at least one seed");

  std::vector<Job> jobs;
  for (Algo algo : spec.algorithms)
    for (int imc : spec.imc_counts)
      for (int dpu : spec.dpu_counts) {
        if (algo == Algo::RD)
          for (std::uint64_t s : spec.rd_seeds) jobs.push_back({algo, imc, dpu, s});
        else
          jobs.push_back({algo, imc, dpu, std::nullopt});
      }

  std::vector<SweepRow> results(jobs.size());
  auto work = [&](std::size_t i) {
    const Job& job = jobs[i];
    rethrow_with_context(job, spec.model, [&] {
      RunConfig rc;
      rc.model = spec.model;
      rc.algo = job.algo;
      rc.n_imc = job.n_imc;
      rc.n_dpu = job.n_dpu;
      rc.seed = job.seed;
      rc.cli_cost = spec.cli_cost;
      rc.sim = spec.sim;
      results[i] = row_from_run(spec, job, run_single(rc));
    });
  };

  if (threads <= 1 || jobs.size() <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    auto worker = [&] {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= jobs.size()) return;
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(threads, static_cast<int>(jobs.size()));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // assemble in cross-product order, inserting one median row per RD group
  std::vector<SweepRow> rows;
  std::size_t i = 0;
  for (Algo algo : spec.algorithms)
    for (int imc : spec.imc_counts)
      for (int dpu : spec.dpu_counts) {
        if (algo != Algo::RD) {
          rows.push_back(results[i++]);
          continue;
        }
        std::vector<double> rates, latencies, utils_imc, utils_dpu;
        std::size_t group_start = i;
        for (std::size_t s = 0; s < spec.rd_seeds.size(); ++s) {
          const SweepRow& r = results[i++];
          rows.push_back(r);
          rates.push_back(r.rate);
          latencies.push_back(r.latency);
          utils_imc.push_back(r.mean_util_imc);
          utils_dpu.push_back(r.mean_util_dpu);
        }
        SweepRow med;
        med.model = spec.model;
        med.algo = algo;
        med.n_imc = imc;
        med.n_dpu = dpu;
        med.seed_label = "median";
        med.rate = median(rates);
        med.latency = median(latencies);
        med.mean_util_imc = median(utils_imc);
        med.mean_util_dpu = median(utils_dpu);
        // the bottleneck id comes from the seed row attaining the lower
        // median rate (first such row in seed order)
        const double lm = lower_median(rates);
        for (std::size_t s = 0; s < spec.rd_seeds.size(); ++s)
          if (results[group_start + s].rate == lm) {
            med.bottleneck_pu = results[group_start + s].bottleneck_pu;
            break;
          }
        rows.push_back(med);
      }

  normalize_rows(rows);
  return rows;
}

void normalize_rows(std::vector<SweepRow>& rows) {
  if (rows.empty()) return;
  double max_rate = rows[0].rate, min_latency = rows[0].latency;
  for (const SweepRow& r : rows) {
    max_rate = std::max(max_rate, r.rate);
    min_latency = std::min(min_latency, r.latency);
  }
  for (SweepRow& r : rows) {
    r.norm_rate = r.rate / max_rate;
    r.norm_latency = r.latency / min_latency;
  }
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "model,algo,n_imc,n_dpu,seed,rate,norm_rate,latency,norm_latency,"
      "mean_util_imc,mean_util_dpu,bottleneck_pu\n";
  for (const SweepRow& r : rows) {
    out += r.model;
    out += ',';
    out += to_string(r.algo);
    out += ',';
    out += std::to_string(r.n_imc);
    out += ',';
    out += std::to_string(r.n_dpu);
    out += ',';
    out += r.seed_label;
    out += ',';
    out += f6(r.rate);
    out += ',';
    out += f6(r.norm_rate);
    out += ',';
    out += f6(r.latency);
    out += ',';
    out += f6(r.norm_latency);
    out += ',';
    out += f6(r.mean_util_imc);
    out += ',';
    out += f6(r.mean_util_dpu);
    out += ',';
    out += std::to_string(r.bottleneck_pu);
    out += '\n';
  }
  return out;
}

std::string report_table(const ModelGraph& g, const PuPool& pool, const CostTable& costs,
                         const Mapping& m, const SimReport& report) {
  (void)costs;
  std::map<int, std::vector<int>> nodes_of;
  for (const auto& [node, pu] : m.assign) nodes_of[pu].push_back(node);

  std::int64_t max_area = 0;
  for (const PuStats& s : report.per_pu) max_area = std::max(max_area, s.weights_area);

  std::ostringstream os;
  os << "model: " << g.name() << "\n";
  os << "pool: " << pool.count(PuType::IMC) << " IMC + " << pool.count(PuType::DPU)
     << " DPU\n";
  os << "latency: " << f6(report.latency) << "  period: " << f6(report.period)
     << "  rate: " << f6(report.rate) << "\n";

  for (PuType t : {PuType::IMC, PuType::DPU}) {
    const std::vector<int> units = pool.units_of(t);
    if (units.empty()) continue;
    os << "\n" << (t == PuType::IMC ? "IMC units" : "DPU units") << "\n";
    os << "  pu   nodes";

    std::size_t width = 5;
    std::map<int, std::string> node_text;
    for (int pu : units) {
      std::string txt = "-";
      auto it = nodes_of.find(pu);
      if (it != nodes_of.end()) {
        txt.clear();
        for (std::size_t i = 0; i < it->second.size(); ++i) {
          if (i) txt += ", ";
          txt += std::to_string(it->second[i]);
        }
      }
      width = std::max(width, txt.size());
      node_text[pu] = txt;
    }
    os << std::string(width - 5, ' ') << "  weights_area%  util%\n";

    double util_sum = 0.0;
    for (int pu : units) {
      const PuStats& s = report.per_pu[static_cast<std::size_t>(pu)];
      double area_pct =
          max_area > 0 ? 100.0 * static_cast<double>(s.weights_area) /
                             static_cast<double>(max_area)
                       : 0.0;
      double util_pct = 100.0 * s.utilization;
      util_sum += util_pct;
      std::ostringstream line;
      line << "  " << std::left << std::setw(4) << pu << " " << std::setw(static_cast<int>(width))
           << node_text[pu] << "  " << std::setw(13) << f1(area_pct) << "  " << f1(util_pct);
      os << line.str() << "\n";
    }
    os << "  mean " << to_string(t) << " utilization: "
       << f1(util_sum / static_cast<double>(units.size())) << "%\n";
  }
  return os.str();
}

std::string inspect_text(const ModelGraph& g, const CostTable& costs) {
  int imc_nodes = 0;
  std::map<OpKind, int> kind_count;
  std::int64_t params = 0;
  for (const NodeSpec& n : g.nodes()) {
    if (classify(n) == PuType::IMC) ++imc_nodes;
    kind_count[n.op]++;
    params += n.weight_count;
  }

  std::ostringstream os;
  os << "model: " << g.name() << "\n";
  os << g.node_count() << " nodes, " << imc_nodes << " IMC-class, "
     << (g.node_count() - static_cast<std::size_t>(imc_nodes)) << " DPU-class\n";
  os << "kinds:";
  for (const auto& [kind, count] : kind_count) os << " " << to_string(kind) << "=" << count;
  os << "\n";
  os << "edges: " << g.edges().size() << "\n";
  os << "parameters: " << params << "\n";

  const PathResult lp = longest_path(g, costs);
  os << "longest path (" << lp.node_ids.size() << " nodes, total " << f6(lp.total_time)
     << "): ";
  for (std::size_t i = 0; i < lp.node_ids.size(); ++i) {
    if (i) os << " -> ";
    os << lp.node_ids[i];
  }
  os << "\n";
  os << "concurrent pairs: " << concurrency_relation(g).size() << "\n";
  return os.str();
}

std::string run_output_json(const RunConfig& cfg, const RunOutput& out) {
  nlohmann::ordered_json doc;
  doc["model"] = cfg.model;
  doc["algo"] = to_string(cfg.algo);
  doc["n_imc"] = cfg.n_imc;
  doc["n_dpu"] = cfg.n_dpu;
  if (out.mapping.seed) doc["seed"] = *out.mapping.seed;
  doc["latency"] = out.report.latency;
  doc["period"] = out.report.period;
  doc["rate"] = out.report.rate;

  std::map<int, std::vector<int>> nodes_of;
  for (const auto& [node, pu] : out.mapping.assign) nodes_of[pu].push_back(node);
  doc["per_pu"] = nlohmann::ordered_json::array();
  for (const PuUnit& u : out.pool.units) {
    const PuStats& s = out.report.per_pu[static_cast<std::size_t>(u.pu_id)];
    nlohmann::ordered_json jp;
    jp["pu_id"] = u.pu_id;
    jp["type"] = to_string(u.type);
    jp["nodes"] = nodes_of.count(u.pu_id) ? nodes_of[u.pu_id] : std::vector<int>{};
    jp["busy_per_frame"] = s.busy_per_frame;
    jp["utilization"] = s.utilization;
    jp["weights_area"] = s.weights_area;
    doc["per_pu"].push_back(jp);
  }
  doc["assign"] = nlohmann::ordered_json::array();
  for (const auto& [node, pu] : out.mapping.assign) doc["assign"].push_back({node, pu});
  return doc.dump(2) + "\n";
}

namespace {

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) throw ConfigError("empty entry in list '" + text + "'");
    const std::size_t dots = token.find("..");
    try {
      if (dots == std::string::npos) {
        out.push_back(std::stoull(token));
      } else {
        std::uint64_t lo = std::stoull(token.substr(0, dots));
        std::uint64_t hi = std::stoull(token.substr(dots + 2));
        if (hi < lo) throw ConfigError("descending range '" + token + "'");
        for (std::uint64_t v = lo; v <= hi; ++v) out.push_back(v);
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("cannot parse '" + token + "' in list '" + text + "'");
    } catch (const std::out_of_range&) {
      throw ConfigError("value out of range in list '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty list '" + text + "'");
  return out;
}

}  // namespace

std::vector<int> parse_count_list(const std::string& text) {
  std::vector<int> out;
  for (std::uint64_t v : parse_u64_list(text)) {
    if (v > 1000000) throw ConfigError("count too large in list '" + text + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  return parse_u64_list(text);
}

}  // namespace imcmap
