#include "imcmap/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <queue>
#include <sstream>

#include "imcmap/error.hpp"

namespace imcmap {

void SimConfig::validate() const {
  if (warmup_frames < 0) throw ConfigError("warmup_frames must be >= 0");
  if (frames <= warmup_frames) throw ConfigError("frames must exceed warmup_frames");
  if (frames < 2) throw ConfigError("at least 2 frames are needed to measure a period");
  if (comm_cost < 0.0) throw ConfigError("comm_cost must be >= 0");
}

namespace {

// Index-based view of one mapped graph, shared by both simulation passes.
struct SimContext {
  int n = 0;
  std::vector<int> id_of;                 // idx -> node id
  std::vector<double> time_of;            // idx -> exec time
  std::vector<int> pu_of;                 // idx -> pu id
  std::vector<int> rank_of;               // idx -> topological rank
  std::vector<std::vector<int>> succs;    // idx -> successor idxs
  std::vector<int> indeg;                 // idx -> predecessor count
  int n_pus = 0;
};

SimContext make_context(const ModelGraph& g, const PuPool& pool, const CostTable& costs,
                        const Mapping& m) {
  SimContext ctx;
  const std::vector<int> order = topo_order(g);
  ctx.n = static_cast<int>(order.size());
  ctx.n_pus = pool.size();

  std::map<int, int> idx;
  for (int i = 0; i < ctx.n; ++i) idx[order[i]] = i;

  ctx.id_of.resize(order.size());
  ctx.time_of.resize(order.size());
  ctx.pu_of.resize(order.size());
  ctx.rank_of.resize(order.size());
  ctx.succs.resize(order.size());
  ctx.indeg.resize(order.size());
  for (int i = 0; i < ctx.n; ++i) {
    int id = order[i];
    ctx.id_of[i] = id;
    ctx.time_of[i] = costs.time(id);
    ctx.pu_of[i] = m.pu_of(id);
    ctx.rank_of[i] = i;
    ctx.indeg[i] = static_cast<int>(g.predecessors(id).size());
    for (int s : g.successors(id)) ctx.succs[i].push_back(idx[s]);
  }
  return ctx;
}

struct PipelineResult {
  double makespan = 0.0;
  std::vector<double> frame_completion;
  std::vector<SimTask> trace;
};

// Event-driven run of `frames` frames. Completions at a given instant are
// handled before releases, and starts last, so every PU picks from the full
// ready set of that instant; all queues break ties on (pu, frame, rank).
PipelineResult run_pipeline(const SimContext& ctx, int frames, double comm, bool record) {
  using Completion = std::tuple<double, int, int, int>;  // end, pu, frame, idx
  using Release = std::tuple<double, int, int, int>;     // time, pu, frame, idx
  using Ready = std::tuple<int, int, int>;               // frame, rank, idx

  std::priority_queue<Completion, std::vector<Completion>, std::greater<Completion>> completions;
  std::priority_queue<Release, std::vector<Release>, std::greater<Release>> releases;
  std::vector<std::priority_queue<Ready, std::vector<Ready>, std::greater<Ready>>> ready(
      static_cast<std::size_t>(ctx.n_pus));
  std::vector<char> busy(static_cast<std::size_t>(ctx.n_pus), 0);

  const std::size_t total = static_cast<std::size_t>(ctx.n) * static_cast<std::size_t>(frames);
  std::vector<int> unmet(total);
  std::vector<double> release_at(total, 0.0);
  auto slot = [&](int frame, int idx) {
    return static_cast<std::size_t>(frame) * static_cast<std::size_t>(ctx.n) +
           static_cast<std::size_t>(idx);
  };

  for (int f = 0; f < frames; ++f)
    for (int i = 0; i < ctx.n; ++i) {
      unmet[slot(f, i)] = ctx.indeg[static_cast<std::size_t>(i)];
      if (ctx.indeg[static_cast<std::size_t>(i)] == 0)
        releases.push({0.0, ctx.pu_of[static_cast<std::size_t>(i)], f, i});
    }

  PipelineResult res;
  res.frame_completion.assign(static_cast<std::size_t>(frames), 0.0);

  std::size_t done = 0;
  while (done < total) {
    double t = std::numeric_limits<double>::infinity();
    if (!completions.empty()) t = std::get<0>(completions.top());
    if (!releases.empty()) t = std::min(t, std::get<0>(releases.top()));

    while (!completions.empty() && std::get<0>(completions.top()) <= t) {
      auto [end, pu, frame, idx] = completions.top();
      completions.pop();
      busy[static_cast<std::size_t>(pu)] = 0;
      ++done;
      for (int s : ctx.succs[static_cast<std::size_t>(idx)]) {
        std::size_t sl = slot(frame, s);
        release_at[sl] = std::max(release_at[sl], end + comm);
        if (--unmet[sl] == 0)
          releases.push({release_at[sl], ctx.pu_of[static_cast<std::size_t>(s)], frame, s});
      }
    }

    while (!releases.empty() && std::get<0>(releases.top()) <= t) {
      auto [time, pu, frame, idx] = releases.top();
      releases.pop();
      ready[static_cast<std::size_t>(pu)].push(
          {frame, ctx.rank_of[static_cast<std::size_t>(idx)], idx});
    }

    for (int pu = 0; pu < ctx.n_pus; ++pu) {
      auto& q = ready[static_cast<std::size_t>(pu)];
      if (busy[static_cast<std::size_t>(pu)] || q.empty()) continue;
      auto [frame, rank, idx] = q.top();
      q.pop();
      (void)rank;
      double end = t + ctx.time_of[static_cast<std::size_t>(idx)];
      busy[static_cast<std::size_t>(pu)] = 1;
      completions.push({end, pu, frame, idx});
      auto& comp = res.frame_completion[static_cast<std::size_t>(frame)];
      comp = std::max(comp, end);
      res.makespan = std::max(res.makespan, end);
      if (record)
        res.trace.push_back({ctx.id_of[static_cast<std::size_t>(idx)], frame, pu, t, end});
    }
  }
  return res;
}

}  // namespace

SimReport simulate(const ModelGraph& g, const PuPool& pool, const CostTable& costs,
                   const Mapping& m, const SimConfig& cfg) {
  cfg.validate();
  const std::vector<std::string> violations = validate_mapping(g, pool, m);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "infeasible mapping:";
    for (const std::string& v : violations) os << "\n  " << v;
    throw InfeasibleError(os.str());
  }

  const SimContext ctx = make_context(g, pool, costs, m);

  PipelineResult lat_pass = run_pipeline(ctx, 1, cfg.comm_cost, false);
  PipelineResult pipe = run_pipeline(ctx, cfg.frames, cfg.comm_cost, cfg.record_trace);

  // Steady state is periodic but not necessarily with a one-frame cycle:
  // when the sink's unit is not the bottleneck, completions bunch into a
  // repeating pattern of several frames whose mean matches the bottleneck
  // pace. On top of that the window can straddle a residual transient at
  // the front and off-pattern completions at the back, where units run out
  // of look-ahead work while the pipeline drains. The estimator matches the
  // smallest cycle on the longest contiguous periodic segment inside the
  // window (a one-frame cycle is the plain constant-interval case) and
  // averages the inter-completion times over the whole cycles it covers.
  auto estimate = [](const std::vector<double>& comp, int frames,
                     int warmup) -> std::optional<double> {
    const int base = std::max(warmup - 1, 0);
    const int n_intervals = frames - 1 - base;
    std::vector<double> gaps(static_cast<std::size_t>(n_intervals));
    for (int i = 0; i < n_intervals; ++i)
      gaps[static_cast<std::size_t>(i)] = comp[static_cast<std::size_t>(base + i + 1)] -
                                          comp[static_cast<std::size_t>(base + i)];
    const double rough = (comp[static_cast<std::size_t>(frames - 1)] -
                          comp[static_cast<std::size_t>(base)]) /
                         static_cast<double>(n_intervals);
    if (!(rough > 0.0)) return std::nullopt;
    if (n_intervals == 1) return gaps[0];
    const double tol = 1e-6 * rough;

    for (int len = 1; len <= n_intervals / 2; ++len) {
      int best_start = 0, best_len = 0, run_start = 0;
      for (int i = 0; i + len <= n_intervals; ++i) {
        const bool consistent =
            i + len < n_intervals &&
            std::abs(gaps[static_cast<std::size_t>(i)] -
                     gaps[static_cast<std::size_t>(i + len)]) <= tol;
        if (!consistent) {
          const int seg_len = i - run_start + len;  // intervals covered
          if (seg_len > best_len) {
            best_len = seg_len;
            best_start = run_start;
          }
          run_start = i + 1;
        }
      }
      if (best_len >= std::max(2 * len, (n_intervals + 1) / 2)) {
        const int span = (best_len / len) * len;
        double p = (comp[static_cast<std::size_t>(base + best_start + span)] -
                    comp[static_cast<std::size_t>(base + best_start)]) /
                   static_cast<double>(span);
        if (p > 0.0) return p;
        return std::nullopt;
      }
    }
    return std::nullopt;
  };

  // A single window can still sit inside a slow transient that looks
  // locally periodic, so the measurement is only accepted once estimates at
  // two consecutive window scales agree; otherwise the horizon doubles and
  // the measurement repeats. The configured frames/warmup set the starting
  // scale (and the trace horizon).
  std::optional<double> period, prev = estimate(pipe.frame_completion, cfg.frames,
                                                cfg.warmup_frames);
  int frames = cfg.frames, warmup = cfg.warmup_frames, attempts_left = 12;
  while (attempts_left-- > 0) {
    frames *= 2;
    warmup *= 2;
    PipelineResult grown = run_pipeline(ctx, frames, cfg.comm_cost, false);
    std::optional<double> cur = estimate(grown.frame_completion, frames, warmup);
    if (cur && prev && std::abs(*cur - *prev) <= 1e-9 * *cur) {
      period = cur;
      break;
    }
    prev = cur;
  }
  if (!period) {
    std::ostringstream os;
    os << "steady-state period did not converge (measured horizons up to " << frames
       << " frames); increase frames or warmup";
    throw ConvergenceError(os.str());
  }

  SimReport rep;
  rep.latency = lat_pass.makespan;
  rep.period = *period;
  rep.rate = 1.0 / *period;
  rep.per_pu.assign(static_cast<std::size_t>(pool.size()), PuStats{});
  for (const auto& [node, pu] : m.assign) {
    PuStats& s = rep.per_pu[static_cast<std::size_t>(pu)];
    s.busy_per_frame += costs.time(node);
    s.weights_area += costs.weight(node);
  }
  for (PuStats& s : rep.per_pu) s.utilization = s.busy_per_frame / *period;

  rep.trace = std::move(pipe.trace);
  std::sort(rep.trace.begin(), rep.trace.end(), [](const SimTask& a, const SimTask& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.pu_id != b.pu_id) return a.pu_id < b.pu_id;
    return a.node_id < b.node_id;
  });
  return rep;
}

double bottleneck_bound(const CostTable& costs, const Mapping& m) {
  std::map<int, double> load;
  for (const auto& [node, pu] : m.assign) load[pu] += costs.time(node);
  double best = 0.0;
  for (const auto& [pu, l] : load) best = std::max(best, l);
  return best;
}

double latency_lower_bound(const ModelGraph& g, const CostTable& costs, double comm_cost) {
  const PathResult lp = longest_path(g, costs);
  // interleave node times and hop costs exactly the way the simulator
  // accumulates them along the critical path
  double s = 0.0;
  for (std::size_t i = 0; i < lp.node_ids.size(); ++i) {
    if (i > 0) s += comm_cost;
    s += costs.time(lp.node_ids[i]);
  }
  return s;
}

std::string trace_to_csv(const std::vector<SimTask>& trace) {
  std::string out = "node_id,frame,pu_id,start,end\n";
  char buf[160];
  for (const SimTask& t : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.6f,%.6f\n", t.node_id, t.frame, t.pu_id,
                  t.start, t.end);
    out += buf;
  }
  return out;
}

}  // namespace imcmap
