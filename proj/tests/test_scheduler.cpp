#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>

#include "imcmap/cost.hpp"
#include "imcmap/error.hpp"
#include "imcmap/models.hpp"
#include "imcmap/scheduler.hpp"
#include "testutil.hpp"

using namespace imcmap;

namespace {

ModelGraph independent_nodes(const std::vector<double>& times,
                             const std::vector<std::int64_t>& weights = {},
                             OpKind kind = OpKind::Conv) {
  std::vector<NodeSpec> nodes;
  for (std::size_t i = 0; i < times.size(); ++i) {
    NodeSpec n;
    n.id = static_cast<int>(i + 1);
    n.name = "n" + std::to_string(n.id);
    n.op = kind;
    n.explicit_time = times[i];
    if (is_mac_kind(kind)) n.weight_count = i < weights.size() ? weights[i] : 1;
    nodes.push_back(n);
  }
  return ModelGraph::build("indep", std::move(nodes), {});
}

std::map<int, double> pu_time_loads(const Mapping& m, const CostTable& costs) {
  std::map<int, double> loads;
  for (const auto& [node, pu] : m.assign) loads[pu] += costs.time(node);
  return loads;
}

std::map<int, std::set<int>> pu_node_sets(const Mapping& m) {
  std::map<int, std::set<int>> sets;
  for (const auto& [node, pu] : m.assign) sets[pu].insert(node);
  return sets;
}

// ---- replay oracles -----------------------------------------------------
// Independent re-derivations of the two greedy schedulers. They rebuild the
// node orderings and ledgers from scratch (longest path via exhaustive
// enumeration, concurrency via the reachability oracle) and record each
// decision point so the greedy choice can be audited.

struct Placement {
  int node = 0;
  std::vector<double> loads_before;  // indexed by pu id (time or weight load)
  std::set<int> avoid;
  std::vector<int> candidates;
  int chosen = -1;
};

struct Replay {
  Mapping mapping;
  std::vector<Placement> placements;
};

Replay lblp_oracle(const ModelGraph& g, const PuPool& pool, const CostTable& costs) {
  auto reach = testutil::reachability_oracle(g);
  auto concurrent = [&](int u, int v) {
    return u != v && !reach[u].count(v) && !reach[v].count(u);
  };

  PathResult lp = testutil::brute_force_longest_path(g, costs);
  std::set<int> lp_set(lp.node_ids.begin(), lp.node_ids.end());

  Replay rep;
  rep.mapping.algo = Algo::LBLP;
  std::vector<double> load(static_cast<std::size_t>(pool.size()), 0.0);

  for (PuType t : {PuType::IMC, PuType::DPU}) {
    std::vector<int> on_path, off_path;
    for (const NodeSpec& n : g.nodes())
      if (classify(n) == t) (lp_set.count(n.id) ? on_path : off_path).push_back(n.id);
    auto desc_time = [&](int a, int b) {
      if (costs.time(a) != costs.time(b)) return costs.time(a) > costs.time(b);
      return a < b;
    };
    std::sort(on_path.begin(), on_path.end(), desc_time);
    std::sort(off_path.begin(), off_path.end(), desc_time);

    std::vector<int> units = pool.units_of(t);
    for (const std::vector<int>* phase : {&on_path, &off_path}) {
      for (int node : *phase) {
        Placement p;
        p.node = node;
        p.loads_before = load;
        p.candidates = units;
        for (const auto& [other, pu] : rep.mapping.assign)
          if (concurrent(node, other)) p.avoid.insert(pu);

        int best = -1;
        for (int pu : units) {
          if (p.avoid.count(pu)) continue;
          if (best == -1 || load[static_cast<std::size_t>(pu)] <
                                load[static_cast<std::size_t>(best)])
            best = pu;
        }
        if (best == -1)
          for (int pu : units)
            if (best == -1 || load[static_cast<std::size_t>(pu)] <
                                  load[static_cast<std::size_t>(best)])
              best = pu;
        p.chosen = best;
        rep.mapping.assign[node] = best;
        load[static_cast<std::size_t>(best)] += costs.time(node);
        rep.placements.push_back(std::move(p));
      }
    }
  }
  return rep;
}

Replay wb_oracle(const ModelGraph& g, const PuPool& pool, const CostTable& costs) {
  Replay rep;
  rep.mapping.algo = Algo::WB;
  std::vector<double> tload(static_cast<std::size_t>(pool.size()), 0.0);
  std::vector<double> wload(static_cast<std::size_t>(pool.size()), 0.0);

  std::vector<int> imc, dpu;
  for (const NodeSpec& n : g.nodes())
    (classify(n) == PuType::IMC ? imc : dpu).push_back(n.id);
  std::sort(imc.begin(), imc.end(), [&](int a, int b) {
    if (costs.weight(a) != costs.weight(b)) return costs.weight(a) > costs.weight(b);
    return a < b;
  });
  std::sort(dpu.begin(), dpu.end(), [&](int a, int b) {
    if (costs.time(a) != costs.time(b)) return costs.time(a) > costs.time(b);
    return a < b;
  });

  for (int node : imc) {
    Placement p;
    p.node = node;
    p.candidates = pool.units_of(PuType::IMC);
    p.loads_before = wload;
    int best = -1;
    for (int pu : p.candidates)
      if (best == -1 ||
          wload[static_cast<std::size_t>(pu)] < wload[static_cast<std::size_t>(best)])
        best = pu;
    p.chosen = best;
    rep.mapping.assign[node] = best;
    wload[static_cast<std::size_t>(best)] += static_cast<double>(costs.weight(node));
    rep.placements.push_back(std::move(p));
  }
  for (int node : dpu) {
    Placement p;
    p.node = node;
    p.candidates = pool.units_of(PuType::DPU);
    p.loads_before = tload;
    int best = -1;
    for (int pu : p.candidates)
      if (best == -1 ||
          tload[static_cast<std::size_t>(pu)] < tload[static_cast<std::size_t>(best)])
        best = pu;
    p.chosen = best;
    rep.mapping.assign[node] = best;
    tload[static_cast<std::size_t>(best)] += costs.time(node);
    rep.placements.push_back(std::move(p));
  }
  return rep;
}

// No alternative unit at the decision point yields a strictly smaller
// resulting maximum load than the chosen one (within the allowed set).
void check_greedy_minimality(const Replay& rep, double added) {
  (void)added;
  for (const Placement& p : rep.placements) {
    std::vector<int> allowed;
    for (int pu : p.candidates)
      if (!p.avoid.count(pu)) allowed.push_back(pu);
    if (allowed.empty()) allowed = p.candidates;

    REQUIRE(std::find(allowed.begin(), allowed.end(), p.chosen) != allowed.end());
    for (int pu : allowed) {
      REQUIRE(p.loads_before[static_cast<std::size_t>(p.chosen)] <=
              p.loads_before[static_cast<std::size_t>(pu)]);
      if (p.loads_before[static_cast<std::size_t>(pu)] ==
          p.loads_before[static_cast<std::size_t>(p.chosen)])
        REQUIRE(p.chosen <= pu);  // id tie-break
    }
  }
}

}  // namespace

TEST_CASE("min_load_assign picks minimum, ties by id, honors avoidance") {
  LoadLedger ledger(2);
  ledger.exec_load = {5.0, 4.0};
  CHECK(min_load_assign({0, 1}, ledger, {}) == 1);

  ledger.exec_load = {7.0, 7.0};
  CHECK(min_load_assign({0, 1}, ledger, {}) == 0);

  ledger.exec_load = {5.0, 4.0};
  CHECK(min_load_assign({0, 1}, ledger, {1}) == 0);

  // every candidate avoided: fall back to the global minimum
  CHECK(min_load_assign({0, 1}, ledger, {0, 1}) == 1);

  CHECK_THROWS_AS(min_load_assign({}, ledger, {}), ConfigError);
}

TEST_CASE("lblp balances five independent nodes onto two units") {
  ModelGraph g = independent_nodes({5, 4, 3, 2, 1});
  CostTable costs = build_cost_table(g, CostParams{});
  Mapping m = schedule_lblp(g, PuPool::make(2, 0), costs);

  auto loads = pu_time_loads(m, costs);
  CHECK(loads[0] == doctest::Approx(8.0));
  CHECK(loads[1] == doctest::Approx(7.0));
  auto sets = pu_node_sets(m);
  CHECK(sets[0] == std::set<int>{1, 4, 5});
  CHECK(sets[1] == std::set<int>{2, 3});
}

TEST_CASE("lblp separates parallel branches") {
  ModelGraph g = testutil::diamond_graph(1, 2, 5, 1);
  CostTable costs = build_cost_table(g, CostParams{});
  Mapping m = schedule_lblp(g, PuPool::make(2, 0), costs);
  CHECK(m.assign.at(2) != m.assign.at(3));
}

TEST_CASE("lblp with one unit per node leaves every unit single-tenant") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ModelGraph g = testutil::random_dag(seed, 10);
    CostTable costs = build_cost_table(g, CostParams{});
    PuPool pool = PuPool::make(testutil::count_class_nodes(g, PuType::IMC),
                               testutil::count_class_nodes(g, PuType::DPU));
    if (pool.size() == 0) continue;
    Mapping m = schedule_lblp(g, pool, costs);
    std::map<int, int> tenants;
    for (const auto& [node, pu] : m.assign) tenants[pu]++;
    for (const auto& [pu, n] : tenants) REQUIRE(n <= 1);
  }
}

TEST_CASE("lblp matches its replay oracle and is greedily minimal") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    ModelGraph g = testutil::random_dag(seed, 11);
    CostTable costs = build_cost_table(g, CostParams{});
    testutil::Rng rng(seed * 77 + 1);
    PuPool pool = testutil::feasible_pool(g, rng, 3);

    Mapping got = schedule_lblp(g, pool, costs);
    Replay want = lblp_oracle(g, pool, costs);
    REQUIRE(got.assign == want.mapping.assign);
    check_greedy_minimality(want, 0.0);
  }
}

TEST_CASE("lblp avoidance holds whenever an unconstrained unit existed") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    ModelGraph g = testutil::random_dag(seed, 11);
    CostTable costs = build_cost_table(g, CostParams{});
    testutil::Rng rng(seed * 131 + 5);
    PuPool pool = testutil::feasible_pool(g, rng, 3);
    Replay rep = lblp_oracle(g, pool, costs);
    REQUIRE(schedule_lblp(g, pool, costs).assign == rep.mapping.assign);

    for (const Placement& p : rep.placements) {
      bool all_avoided = true;
      for (int pu : p.candidates)
        if (!p.avoid.count(pu)) all_avoided = false;
      if (!all_avoided) REQUIRE(!p.avoid.count(p.chosen));
    }
  }
}

TEST_CASE("wb balances weights for IMC nodes") {
  ModelGraph g = independent_nodes({1, 1, 1}, {100, 80, 60});
  CostTable costs = build_cost_table(g, CostParams{});
  Mapping m = schedule_wb(g, PuPool::make(2, 0), costs);
  auto sets = pu_node_sets(m);
  CHECK(sets[0] == std::set<int>{1});      // the 100-weight node alone
  CHECK(sets[1] == std::set<int>{2, 3});   // 80 + 60
}

TEST_CASE("wb with no DPU nodes skips the DPU phase") {
  ModelGraph g = independent_nodes({1, 1}, {50, 50});
  CostTable costs = build_cost_table(g, CostParams{});
  Mapping m = schedule_wb(g, PuPool::make(2, 0), costs);
  CHECK(m.assign.size() == 2);
  // equal weights: id tie-break, one node per unit
  CHECK(m.assign.at(1) == 0);
  CHECK(m.assign.at(2) == 1);
}

TEST_CASE("wb matches its replay oracle") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    ModelGraph g = testutil::random_dag(seed, 12);
    CostTable costs = build_cost_table(g, CostParams{});
    testutil::Rng rng(seed * 31 + 7);
    PuPool pool = testutil::feasible_pool(g, rng, 3);

    Mapping got = schedule_wb(g, pool, costs);
    Replay want = wb_oracle(g, pool, costs);
    REQUIRE(got.assign == want.mapping.assign);
    check_greedy_minimality(want, 0.0);
  }
}

TEST_CASE("rr cycles through units in id order") {
  SUBCASE("five nodes over two units") {
    ModelGraph g = independent_nodes({1, 1, 1, 1, 1});
    CostTable costs = build_cost_table(g, CostParams{});
    Mapping m = schedule_rr(g, PuPool::make(2, 0), costs);
    auto sets = pu_node_sets(m);
    CHECK(sets[0] == std::set<int>{1, 3, 5});
    CHECK(sets[1] == std::set<int>{2, 4});
  }
  SUBCASE("single unit takes everything") {
    ModelGraph g = independent_nodes({1, 1, 1});
    CostTable costs = build_cost_table(g, CostParams{});
    Mapping m = schedule_rr(g, PuPool::make(1, 0), costs);
    for (const auto& [node, pu] : m.assign) CHECK(pu == 0);
  }
  SUBCASE("types form independent streams") {
    std::vector<NodeSpec> nodes;
    NodeSpec c1, a2, c3;
    c1.id = 1; c1.name = "c1"; c1.op = OpKind::Conv; c1.explicit_time = 1.0; c1.weight_count = 1;
    a2.id = 2; a2.name = "a2"; a2.op = OpKind::Add; a2.explicit_time = 1.0;
    c3.id = 3; c3.name = "c3"; c3.op = OpKind::Conv; c3.explicit_time = 1.0; c3.weight_count = 1;
    ModelGraph g = ModelGraph::build("mixed", {c1, a2, c3}, {{1, 2}, {2, 3}});
    CostTable costs = build_cost_table(g, CostParams{});
    Mapping m = schedule_rr(g, PuPool::make(2, 1), costs);
    CHECK(m.assign.at(1) == 0);
    CHECK(m.assign.at(3) == 1);
    CHECK(m.assign.at(2) == 2);  // first DPU unit
  }
}

TEST_CASE("rd is seed-deterministic") {
  ModelGraph g = builtin_model("resnet8");
  CostTable costs = build_cost_table(g, CostParams{});
  PuPool pool = PuPool::make(3, 2);
  Mapping a = schedule_rd(g, pool, costs, 42);
  Mapping b = schedule_rd(g, pool, costs, 42);
  CHECK(a.assign == b.assign);
  CHECK(a.seed == 42);
  CHECK(mapping_to_json_string(a) == mapping_to_json_string(b));
  Mapping c = schedule_rd(g, pool, costs, 43);
  CHECK(a.assign != c.assign);  // overwhelmingly likely for this size
}

TEST_CASE("rd phase one is a bijection when counts match") {
  ModelGraph g = independent_nodes({1, 1});
  CostTable costs = build_cost_table(g, CostParams{});
  PuPool pool = PuPool::make(2, 0);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Mapping m = schedule_rd(g, pool, costs, seed);
    REQUIRE(m.assign.at(1) != m.assign.at(2));
  }
}

TEST_CASE("rd assigns distinct units when nodes are fewer than units") {
  ModelGraph g = independent_nodes({1, 1});
  CostTable costs = build_cost_table(g, CostParams{});
  PuPool pool = PuPool::make(3, 0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Mapping m = schedule_rd(g, pool, costs, seed);
    REQUIRE(m.assign.at(1) != m.assign.at(2));
  }
}

TEST_CASE("rd spreads the leftover node uniformly") {
  // three nodes on two units: phase one fills both units, the remaining
  // node lands uniformly; tally where the doubled-up unit is
  ModelGraph g = independent_nodes({1, 1, 1});
  CostTable costs = build_cost_table(g, CostParams{});
  PuPool pool = PuPool::make(2, 0);

  int doubled_on_0 = 0;
  std::map<int, int> node_on_0;
  const int trials = 10000;
  for (int seed = 0; seed < trials; ++seed) {
    Mapping m = schedule_rd(g, pool, costs, static_cast<std::uint64_t>(seed));
    std::map<int, int> count;
    for (const auto& [node, pu] : m.assign) {
      count[pu]++;
      if (pu == 0) node_on_0[node]++;
    }
    REQUIRE(count[0] + count[1] == 3);
    REQUIRE(count[0] >= 1);
    REQUIRE(count[1] >= 1);
    if (count[0] == 2) ++doubled_on_0;
  }
  double freq = static_cast<double>(doubled_on_0) / trials;
  CHECK(freq > 0.48);
  CHECK(freq < 0.52);
  for (const auto& [node, c] : node_on_0) {
    double f = static_cast<double>(c) / trials;
    CHECK(f > 0.48);
    CHECK(f < 0.52);
  }
}

TEST_CASE("every scheduler emits total type-feasible mappings") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    ModelGraph g = testutil::random_dag(seed, 14);
    CostTable costs = build_cost_table(g, CostParams{});
    testutil::Rng rng(seed * 1009 + 3);
    PuPool pool = testutil::feasible_pool(g, rng, 3);

    for (Algo algo : {Algo::LBLP, Algo::WB, Algo::RR, Algo::RD}) {
      Mapping m = schedule(algo, g, pool, costs, 7);
      REQUIRE(validate_mapping(g, pool, m).empty());
      REQUIRE(m.assign.size() == g.node_count());
      // deterministic re-run
      Mapping again = schedule(algo, g, pool, costs, 7);
      REQUIRE(mapping_to_json_string(m) == mapping_to_json_string(again));
    }
  }
}

TEST_CASE("schedulers refuse pools missing a needed type") {
  ModelGraph g = builtin_model("resnet8");  // has both classes
  CostTable costs = build_cost_table(g, CostParams{});
  CHECK_THROWS_AS(schedule_lblp(g, PuPool::make(2, 0), costs), ConfigError);
  CHECK_THROWS_AS(schedule_wb(g, PuPool::make(0, 2), costs), ConfigError);
  CHECK_THROWS_AS(schedule_rr(g, PuPool::make(2, 0), costs), ConfigError);
  CHECK_THROWS_AS(schedule_rd(g, PuPool::make(2, 0), costs, 1), ConfigError);
}

TEST_CASE("validate_mapping reports violations") {
  ModelGraph g = testutil::diamond_graph(1, 2, 5, 1);  // all conv
  PuPool pool = PuPool::make(1, 1);

  SUBCASE("missing node") {
    Mapping m;
    m.assign = {{1, 0}, {2, 0}, {3, 0}};  // node 4 missing
    auto v = validate_mapping(g, pool, m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("node 4") != std::string::npos);
  }
  SUBCASE("wrong type") {
    Mapping m;
    m.assign = {{1, 0}, {2, 0}, {3, 0}, {4, 1}};  // conv on the DPU
    auto v = validate_mapping(g, pool, m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("node 4") != std::string::npos);
    CHECK(v[0].find("imc") != std::string::npos);
  }
  SUBCASE("unknown pu and unknown node") {
    Mapping m;
    m.assign = {{1, 0}, {2, 0}, {3, 0}, {4, 9}, {77, 0}};
    auto v = validate_mapping(g, pool, m);
    CHECK(v.size() == 2);
  }
}

TEST_CASE("full parallelism makes all four algorithms single-tenant") {
  ModelGraph g = builtin_model("resnet8");
  CostTable costs = build_cost_table(g, CostParams{});
  PuPool pool = PuPool::make(testutil::count_class_nodes(g, PuType::IMC),
                             testutil::count_class_nodes(g, PuType::DPU));
  for (Algo algo : {Algo::LBLP, Algo::WB, Algo::RR, Algo::RD}) {
    Mapping m = schedule(algo, g, pool, costs, 5);
    std::map<int, int> tenants;
    for (const auto& [node, pu] : m.assign) tenants[pu]++;
    for (const auto& [pu, n] : tenants) REQUIRE(n == 1);
  }
}
